#include "pwtl/surrogate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json_io.hpp"
#include "pwtl/error.hpp"
#include "pwtl/parallel.hpp"
#include "pwtl/rng.hpp"

namespace pwtl {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

ConstMap as_eigen(const Matrix& m) {
    return ConstMap(m.data.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
}

void check_dim(std::span<const double> x, std::size_t expected) {
    if (x.size() != expected) {
        throw std::invalid_argument("predict: expected " + std::to_string(expected) + " features, got " +
                                    std::to_string(x.size()));
    }
}

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

// --- MLP internals -----------------------------------------------------------

struct Forward {
    std::vector<RowMatrix> pre;   // pre-activations per layer
    std::vector<RowMatrix> post;  // post-activations; post[0] is the input
};

void activate(Activation a, const RowMatrix& z, RowMatrix& out) {
    if (a == Activation::Relu) {
        out = z.cwiseMax(0.0);
    } else {
        out = z.array().tanh().matrix();
    }
}

RowMatrix activation_derivative(Activation a, const RowMatrix& z, const RowMatrix& post) {
    if (a == Activation::Relu) {
        return (z.array() > 0.0).cast<double>().matrix();
    }
    return (1.0 - post.array().square()).matrix();
}

Eigen::Map<const RowMatrix> weights_of(const DenseLayer& l) {
    return {l.weights.data(), static_cast<Eigen::Index>(l.outputs), static_cast<Eigen::Index>(l.inputs)};
}

Eigen::Map<const Eigen::RowVectorXd> bias_of(const DenseLayer& l) {
    return {l.bias.data(), static_cast<Eigen::Index>(l.outputs)};
}

Forward forward(const std::vector<DenseLayer>& layers, Activation act, const Eigen::Ref<const RowMatrix>& x) {
    Forward f;
    f.post.push_back(x);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        RowMatrix z = f.post.back() * weights_of(layers[l]).transpose();
        z.rowwise() += bias_of(layers[l]);
        f.pre.push_back(z);
        RowMatrix a;
        if (l + 1 < layers.size()) {
            activate(act, z, a);
        } else {
            a = z;  // identity output
        }
        f.post.push_back(std::move(a));
    }
    return f;
}

double loss_and_gradient(const std::vector<DenseLayer>& layers, Activation act,
                         const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& y,
                         double alpha, std::vector<double>* gradient) {
    const auto n = static_cast<double>(x.rows());
    const Forward f = forward(layers, act, x);
    const RowMatrix diff = f.post.back() - y;
    double l2 = 0.0;
    for (const auto& l : layers) {
        l2 += weights_of(l).squaredNorm();
    }
    const double loss = 0.5 * diff.squaredNorm() / n + 0.5 * alpha * l2 / n;
    if (gradient == nullptr) {
        return loss;
    }

    std::size_t total = 0;
    for (const auto& l : layers) {
        total += l.weights.size() + l.bias.size();
    }
    gradient->assign(total, 0.0);
    std::vector<std::size_t> offset(layers.size());
    std::size_t pos = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        offset[l] = pos;
        pos += layers[l].weights.size() + layers[l].bias.size();
    }

    RowMatrix delta = diff / n;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const DenseLayer& layer = layers[l];
        Eigen::Map<RowMatrix> gw(gradient->data() + offset[l], static_cast<Eigen::Index>(layer.outputs),
                                 static_cast<Eigen::Index>(layer.inputs));
        Eigen::Map<Eigen::RowVectorXd> gb(gradient->data() + offset[l] + layer.weights.size(),
                                          static_cast<Eigen::Index>(layer.outputs));
        gw = delta.transpose() * f.post[l] + (alpha / n) * weights_of(layer);
        gb = delta.colwise().sum();
        if (l > 0) {
            RowMatrix back = delta * weights_of(layer);
            delta = back.cwiseProduct(activation_derivative(act, f.pre[l - 1], f.post[l]));
        }
    }
    return loss;
}

}  // namespace

// --- Matrix / enums ------------------------------------------------------------

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(idx[r] * cols), cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    return out;
}

const char* to_string(Target t) {
    switch (t) {
        case Target::Speed: return "speed";
        case Target::Queue: return "queue";
        case Target::Both: return "both";
    }
    return "?";
}

Target parse_target(const std::string& text) {
    if (text == "speed") return Target::Speed;
    if (text == "queue") return Target::Queue;
    if (text == "both") return Target::Both;
    throw std::invalid_argument("unknown target '" + text + "' (expected speed|queue|both)");
}

std::size_t target_count(Target t) { return t == Target::Both ? 2 : 1; }

const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::Relu;
    if (text == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + text + "' (expected relu|tanh)");
}

// --- linear ----------------------------------------------------------------------

LinearModel::LinearModel(std::size_t inputs, std::size_t outputs)
    : inputs_(inputs), outputs_(outputs), weights_(inputs * outputs, 0.0), intercepts_(outputs, 0.0) {}

std::vector<double> LinearModel::predict(std::span<const double> x) const {
    check_dim(x, inputs_);
    std::vector<double> out(intercepts_);
    for (std::size_t o = 0; o < outputs_; ++o) {
        for (std::size_t i = 0; i < inputs_; ++i) {
            out[o] += weights_[o * inputs_ + i] * x[i];
        }
    }
    return out;
}

LinearModel fit_linear(const Matrix& x, const Matrix& y, double ridge) {
    if (x.rows == 0 || x.cols == 0 || y.cols == 0) {
        throw std::invalid_argument("fit_linear: empty data");
    }
    if (x.rows != y.rows) {
        throw std::invalid_argument("fit_linear: feature and target row counts differ");
    }
    const auto X = as_eigen(x);
    const auto Y = as_eigen(y);
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const Eigen::RowVectorXd y_mean = Y.colwise().mean();
    const RowMatrix xc = X.rowwise() - x_mean;
    const RowMatrix yc = Y.rowwise() - y_mean;

    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += ridge;
    const Eigen::MatrixXd rhs = xc.transpose() * yc;
    const Eigen::MatrixXd w = gram.ldlt().solve(rhs);  // inputs x outputs

    LinearModel model(x.cols, y.cols);
    for (std::size_t o = 0; o < y.cols; ++o) {
        double b = y_mean(static_cast<Eigen::Index>(o));
        for (std::size_t i = 0; i < x.cols; ++i) {
            const double wi = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o));
            model.weight(o, i) = wi;
            b -= wi * x_mean(static_cast<Eigen::Index>(i));
        }
        model.intercept(o) = b;
    }
    return model;
}

// --- MLP ---------------------------------------------------------------------------

MlpModel::MlpModel(std::vector<DenseLayer> layers, Activation activation, std::vector<double> target_mean,
                   std::vector<double> target_scale)
    : layers_(std::move(layers)),
      activation_(activation),
      target_mean_(std::move(target_mean)),
      target_scale_(std::move(target_scale)) {
    if (layers_.empty()) {
        throw std::invalid_argument("MlpModel: at least one layer is required");
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.size() != layer.inputs * layer.outputs || layer.bias.size() != layer.outputs ||
            (l > 0 && layer.inputs != layers_[l - 1].outputs)) {
            throw std::invalid_argument("MlpModel: inconsistent layer shapes");
        }
    }
    if (target_mean_.size() != output_dim() || target_scale_.size() != output_dim()) {
        throw std::invalid_argument("MlpModel: target scaling does not match the output size");
    }
}

std::size_t MlpModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().inputs; }
std::size_t MlpModel::output_dim() const { return layers_.empty() ? 0 : layers_.back().outputs; }

std::vector<double> MlpModel::predict(std::span<const double> x) const {
    check_dim(x, input_dim());
    const Eigen::Map<const RowMatrix> in(x.data(), 1, static_cast<Eigen::Index>(x.size()));
    const Forward f = forward(layers_, activation_, in);
    std::vector<double> out(output_dim());
    for (std::size_t o = 0; o < out.size(); ++o) {
        out[o] = f.post.back()(0, static_cast<Eigen::Index>(o)) * target_scale_[o] + target_mean_[o];
    }
    return out;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) {
        n += l.weights.size() + l.bias.size();
    }
    return n;
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weights.begin(), l.weights.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void MlpModel::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw std::invalid_argument("set_parameters: wrong parameter count");
    }
    auto it = flat.begin();
    for (auto& l : layers_) {
        std::copy_n(it, l.weights.size(), l.weights.begin());
        it += static_cast<std::ptrdiff_t>(l.weights.size());
        std::copy_n(it, l.bias.size(), l.bias.begin());
        it += static_cast<std::ptrdiff_t>(l.bias.size());
    }
}

MlpModel MlpModel::initialised(std::size_t inputs, std::size_t outputs, const MlpHyper& hyper,
                               std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> sizes{inputs};
    sizes.insert(sizes.end(), hyper.hidden.begin(), hyper.hidden.end());
    sizes.push_back(outputs);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        DenseLayer layer{sizes[l], sizes[l + 1], {}, {}};
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
        layer.weights.resize(layer.inputs * layer.outputs);
        layer.bias.resize(layer.outputs);
        for (auto& w : layer.weights) {
            w = rng.uniform(-bound, bound);
        }
        for (auto& b : layer.bias) {
            b = rng.uniform(-bound, bound);
        }
        layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(layers), hyper.activation, std::vector<double>(outputs, 0.0),
                    std::vector<double>(outputs, 1.0));
}

double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, const Matrix& y, double alpha,
                             std::vector<double>& gradient) {
    if (x.rows != y.rows || x.cols != model.input_dim() || y.cols != model.output_dim()) {
        throw std::invalid_argument("mlp_loss_and_gradient: shape mismatch");
    }
    return loss_and_gradient(model.layers(), model.activation(), as_eigen(x), as_eigen(y), alpha, &gradient);
}

MlpModel fit_mlp(const Matrix& x, const Matrix& y, const MlpHyper& hyper, std::uint64_t seed) {
    if (x.rows < 2 || x.rows != y.rows) {
        throw std::invalid_argument("fit_mlp: need at least 2 rows with matching targets");
    }
    const std::size_t n_out = y.cols;

    // Standardise targets.
    std::vector<double> mean(n_out, 0.0), scale(n_out, 1.0);
    for (std::size_t o = 0; o < n_out; ++o) {
        double m = 0.0;
        for (std::size_t r = 0; r < y.rows; ++r) m += y(r, o);
        m /= static_cast<double>(y.rows);
        double var = 0.0;
        for (std::size_t r = 0; r < y.rows; ++r) var += (y(r, o) - m) * (y(r, o) - m);
        var /= static_cast<double>(y.rows);
        mean[o] = m;
        scale[o] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    Matrix ys(y.rows, n_out);
    for (std::size_t r = 0; r < y.rows; ++r) {
        for (std::size_t o = 0; o < n_out; ++o) ys(r, o) = (y(r, o) - mean[o]) / scale[o];
    }

    Rng rng(seed);
    MlpModel model = MlpModel::initialised(x.cols, n_out, hyper, rng.next_u64());

    std::vector<std::size_t> order(x.rows);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    std::size_t n_val = 0;
    if (hyper.early_stopping) {
        n_val = static_cast<std::size_t>(std::floor(hyper.validation_fraction * static_cast<double>(x.rows)));
        if (n_val < 1 || n_val >= x.rows) {
            n_val = 0;  // too small to hold out anything
        }
    }
    const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    const Matrix x_val = x.select_rows(val_idx);
    const Matrix y_val = ys.select_rows(val_idx);
    const Matrix x_train = x.select_rows(train_idx);
    const Matrix y_train = ys.select_rows(train_idx);

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    std::vector<double> params = model.parameters();
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
    std::int64_t t = 0;

    std::vector<double> best_params = params;
    double best_score = std::numeric_limits<double>::infinity();
    int stale = 0;
    const std::size_t batch = std::max<std::size_t>(1, std::min(hyper.batch_size, x_train.rows));
    std::vector<std::size_t> perm(x_train.rows);
    std::iota(perm.begin(), perm.end(), 0);

    int epoch = 0;
    for (; epoch < hyper.max_epochs; ++epoch) {
        shuffle(perm, rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < perm.size(); start += batch) {
            const std::size_t end = std::min(start + batch, perm.size());
            const std::span<const std::size_t> idx(perm.data() + start, end - start);
            const Matrix xb = x_train.select_rows(idx);
            const Matrix yb = y_train.select_rows(idx);
            const double loss = mlp_loss_and_gradient(model, xb, yb, hyper.alpha, grad);
            if (!std::isfinite(loss)) {
                throw NumericalError("fit_mlp: non-finite loss at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(idx.size());
            ++t;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
            const double step = hyper.learning_rate * std::sqrt(c2) / c1;
            for (std::size_t p = 0; p < params.size(); ++p) {
                m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
                v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
                params[p] -= step * m[p] / (std::sqrt(v[p]) + eps);
            }
            model.set_parameters(params);
        }
        epoch_loss /= static_cast<double>(perm.size());

        double score = epoch_loss;
        if (n_val > 0) {
            score = loss_and_gradient(model.layers(), model.activation(), as_eigen(x_val), as_eigen(y_val), 0.0,
                                      nullptr);
        }
        if (!std::isfinite(score)) {
            throw NumericalError("fit_mlp: non-finite loss at epoch " + std::to_string(epoch));
        }
        if (score < best_score - hyper.tolerance) {
            stale = 0;
        } else {
            ++stale;
        }
        if (score < best_score) {
            best_score = score;
            best_params = params;
        }
        if (stale >= hyper.patience) {
            ++epoch;
            break;
        }
    }
    if (n_val > 0) {
        model.set_parameters(best_params);
    }
    MlpModel fitted(model.layers(), model.activation(), mean, scale);
    fitted.epochs_trained = epoch;
    return fitted;
}

// --- evaluation -------------------------------------------------------------------

KFoldResult kfold_rmse(const FitFn& fit, const Matrix& x, const Matrix& y, std::size_t k, std::uint64_t seed,
                       std::size_t workers) {
    if (k < 2) {
        throw std::invalid_argument("kfold_rmse: k must be at least 2");
    }
    if (x.rows < k || x.rows != y.rows) {
        throw std::invalid_argument("kfold_rmse: need at least k rows with matching targets");
    }
    Rng rng(seed);
    std::vector<std::size_t> idx(x.rows);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);

    // Squared errors per fold and target, reduced in fold order afterwards.
    std::vector<std::vector<double>> fold_sse(k, std::vector<double>(y.cols, 0.0));
    parallel_for(k, workers, [&](std::size_t f) {
        const std::size_t lo = f * x.rows / k;
        const std::size_t hi = (f + 1) * x.rows / k;
        std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                      idx.begin() + static_cast<std::ptrdiff_t>(hi));
        std::vector<std::size_t> train;
        train.reserve(x.rows - test.size());
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(lo));
        train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(hi), idx.end());
        const auto model = fit(x.select_rows(train), y.select_rows(train));
        for (const std::size_t r : test) {
            const auto pred = model->predict(x.row(r));
            for (std::size_t o = 0; o < y.cols; ++o) {
                const double e = pred[o] - y(r, o);
                fold_sse[f][o] += e * e;
            }
        }
    });

    KFoldResult result;
    result.rmse.assign(y.cols, 0.0);
    for (std::size_t o = 0; o < y.cols; ++o) {
        double sse = 0.0;
        for (std::size_t f = 0; f < k; ++f) sse += fold_sse[f][o];
        result.rmse[o] = std::sqrt(sse / static_cast<double>(x.rows));
        result.mean_rmse += result.rmse[o] / static_cast<double>(y.cols);
    }
    return result;
}

GridSearchResult grid_search_mlp(const Matrix& x, const Matrix& y, const MlpHyper& base, std::size_t k,
                                 std::uint64_t seed, std::size_t workers) {
    GridSearchResult out;
    out.best_rmse = std::numeric_limits<double>::infinity();
    for (const Activation act : {Activation::Relu, Activation::Tanh}) {
        for (const double alpha : {1e-4, 1e-3}) {
            for (const double lr : {1e-3, 1e-2}) {
                MlpHyper h = base;
                h.activation = act;
                h.alpha = alpha;
                h.learning_rate = lr;
                FitFn fit = [&h, seed](const Matrix& xt, const Matrix& yt) {
                    return std::make_unique<MlpModel>(fit_mlp(xt, yt, h, seed));
                };
                const double score = kfold_rmse(fit, x, y, k, seed, workers).mean_rmse;
                out.scores.emplace_back(h, score);
                if (score < out.best_rmse) {
                    out.best_rmse = score;
                    out.best = h;
                }
            }
        }
    }
    return out;
}

TrainingData training_data(const Dataset& table, Target target) {
    std::vector<const DatasetRow*> ok;
    for (const auto& row : table.rows) {
        if (row.ok()) ok.push_back(&row);
    }
    TrainingData td;
    td.x = Matrix(ok.size(), 3 * table.intersection_ids.size());
    td.y = Matrix(ok.size(), target_count(target));
    for (std::size_t r = 0; r < ok.size(); ++r) {
        const auto enc = encode_signals(ok[r]->signals);
        std::copy(enc.begin(), enc.end(), td.x.data.begin() + static_cast<std::ptrdiff_t>(r * td.x.cols));
        switch (target) {
            case Target::Speed: td.y(r, 0) = ok[r]->avg_speed; break;
            case Target::Queue: td.y(r, 0) = ok[r]->queue_length; break;
            case Target::Both:
                td.y(r, 0) = ok[r]->avg_speed;
                td.y(r, 1) = ok[r]->queue_length;
                break;
        }
    }
    return td;
}

// --- model files --------------------------------------------------------------------

void write_surrogate(const SurrogateBundle& bundle, const std::filesystem::path& path) {
    using detail::Json;
    if (!bundle.model) {
        throw std::invalid_argument("write_surrogate: no model");
    }
    Json doc;
    doc["kind"] = bundle.model->kind();
    doc["target"] = to_string(bundle.target);
    doc["feature_ids"] = bundle.feature_ids;
    doc["features_per_intersection"] = {"red", "green", "offset"};
    doc["normalization"] = {{"red", {kMinPhaseSeconds, kMaxPhaseSeconds}},
                            {"green", {kMinPhaseSeconds, kMaxPhaseSeconds}},
                            {"offset", "offset / (red + green - 1)"}};
    if (const auto* lin = dynamic_cast<const LinearModel*>(bundle.model.get())) {
        Json weights = Json::array();
        Json intercepts = Json::array();
        for (std::size_t o = 0; o < lin->output_dim(); ++o) {
            Json row = Json::array();
            for (std::size_t i = 0; i < lin->input_dim(); ++i) row.push_back(lin->weight(o, i));
            weights.push_back(std::move(row));
            intercepts.push_back(lin->intercept(o));
        }
        doc["inputs"] = lin->input_dim();
        doc["outputs"] = lin->output_dim();
        doc["weights"] = std::move(weights);
        doc["intercepts"] = std::move(intercepts);
    } else if (const auto* mlp = dynamic_cast<const MlpModel*>(bundle.model.get())) {
        doc["activation"] = to_string(mlp->activation());
        Json layers = Json::array();
        for (const auto& l : mlp->layers()) {
            layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"bias", l.bias}});
        }
        doc["layers"] = std::move(layers);
        doc["target_mean"] = mlp->target_mean();
        doc["target_scale"] = mlp->target_scale();
    } else {
        throw std::invalid_argument("write_surrogate: unsupported model kind '" + bundle.model->kind() + "'");
    }
    detail::write_json_file(doc, path);
}

SurrogateBundle read_surrogate(const std::filesystem::path& path) {
    using detail::member;
    const auto doc = detail::read_json_file(path);
    const std::string ctx = path.string();
    SurrogateBundle bundle;
    try {
        bundle.target = parse_target(member<std::string>(doc, "target", ctx));
    } catch (const std::invalid_argument& e) {
        throw ParseError(ctx + ": " + e.what());
    }
    bundle.feature_ids = member<std::vector<std::string>>(doc, "feature_ids", ctx);
    const auto kind = member<std::string>(doc, "kind", ctx);
    if (kind == "linear") {
        const auto inputs = member<std::size_t>(doc, "inputs", ctx);
        const auto outputs = member<std::size_t>(doc, "outputs", ctx);
        const auto weights = member<std::vector<std::vector<double>>>(doc, "weights", ctx);
        const auto intercepts = member<std::vector<double>>(doc, "intercepts", ctx);
        if (weights.size() != outputs || intercepts.size() != outputs) {
            throw ParseError(ctx + ": linear model shape mismatch");
        }
        auto model = std::make_unique<LinearModel>(inputs, outputs);
        for (std::size_t o = 0; o < outputs; ++o) {
            if (weights[o].size() != inputs) throw ParseError(ctx + ": linear model shape mismatch");
            for (std::size_t i = 0; i < inputs; ++i) model->weight(o, i) = weights[o][i];
            model->intercept(o) = intercepts[o];
        }
        bundle.model = std::move(model);
    } else if (kind == "mlp") {
        Activation act{};
        try {
            act = parse_activation(member<std::string>(doc, "activation", ctx));
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        std::vector<DenseLayer> layers;
        if (!doc.contains("layers") || !doc.at("layers").is_array()) {
            throw ParseError(ctx + ": missing array 'layers'");
        }
        for (const auto& l : doc.at("layers")) {
            layers.push_back({member<std::size_t>(l, "inputs", ctx), member<std::size_t>(l, "outputs", ctx),
                              member<std::vector<double>>(l, "weights", ctx),
                              member<std::vector<double>>(l, "bias", ctx)});
        }
        try {
            bundle.model = std::make_unique<MlpModel>(std::move(layers), act,
                                                      member<std::vector<double>>(doc, "target_mean", ctx),
                                                      member<std::vector<double>>(doc, "target_scale", ctx));
        } catch (const std::invalid_argument& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    } else {
        throw ParseError(ctx + ": unknown model kind '" + kind + "'");
    }
    if (bundle.model->input_dim() != 3 * bundle.feature_ids.size() ||
        bundle.model->output_dim() != target_count(bundle.target)) {
        throw ParseError(ctx + ": model dimensions do not match its features/target");
    }
    return bundle;
}

}  // namespace pwtl
