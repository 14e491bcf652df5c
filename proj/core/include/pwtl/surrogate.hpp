#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pwtl/dataset.hpp"

namespace pwtl {

/// Dense row-major matrix used for feature and target tables.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    /// Rows picked by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> idx) const;
};

enum class Target { Speed, Queue, Both };

const char* to_string(Target t);
Target parse_target(const std::string& text);
std::size_t target_count(Target t);

/// Common interface for every surrogate: a fitted map from an encoded
/// configuration in [0,1]^d to one or two predicted metrics.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    /// Throws std::invalid_argument when x has the wrong dimension.
    virtual std::vector<double> predict(std::span<const double> x) const = 0;
    virtual std::string kind() const = 0;
};

/// y = W x + b, one row of W per target.
class LinearModel final : public Regressor {
public:
    LinearModel() = default;
    LinearModel(std::size_t inputs, std::size_t outputs);

    std::size_t input_dim() const override { return inputs_; }
    std::size_t output_dim() const override { return outputs_; }
    std::vector<double> predict(std::span<const double> x) const override;
    std::string kind() const override { return "linear"; }

    double weight(std::size_t out, std::size_t in) const { return weights_[out * inputs_ + in]; }
    double& weight(std::size_t out, std::size_t in) { return weights_[out * inputs_ + in]; }
    double intercept(std::size_t out) const { return intercepts_[out]; }
    double& intercept(std::size_t out) { return intercepts_[out]; }

private:
    std::size_t inputs_ = 0;
    std::size_t outputs_ = 0;
    std::vector<double> weights_;
    std::vector<double> intercepts_;
};

/// Least squares on centred data with a ridge term on the normal equations;
/// the intercept is not penalised. Throws std::invalid_argument on empty or
/// mismatched data.
LinearModel fit_linear(const Matrix& x, const Matrix& y, double ridge = 1e-8);

enum class Activation { Relu, Tanh };

const char* to_string(Activation a);
Activation parse_activation(const std::string& text);

struct MlpHyper {
    std::vector<std::size_t> hidden{100, 50};
    Activation activation = Activation::Relu;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double alpha = 1e-4;  ///< L2 strength
    int max_epochs = 500;
    bool early_stopping = true;
    double validation_fraction = 0.1;
    int patience = 10;      ///< epochs without validation improvement
    double tolerance = 1e-4;
};

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  ///< outputs x inputs, row-major
    std::vector<double> bias;
};

/// Multilayer perceptron with identity output. Targets are standardised
/// during training; predict() returns them in original units.
class MlpModel final : public Regressor {
public:
    MlpModel() = default;
    MlpModel(std::vector<DenseLayer> layers, Activation activation, std::vector<double> target_mean,
             std::vector<double> target_scale);

    std::size_t input_dim() const override;
    std::size_t output_dim() const override;
    std::vector<double> predict(std::span<const double> x) const override;
    std::string kind() const override { return "mlp"; }

    const std::vector<DenseLayer>& layers() const { return layers_; }
    Activation activation() const { return activation_; }
    const std::vector<double>& target_mean() const { return target_mean_; }
    const std::vector<double>& target_scale() const { return target_scale_; }

    std::size_t parameter_count() const;
    /// Weights then bias of each layer, in layer order.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// Untrained network with Glorot-uniform weights and biases and identity
    /// target scaling.
    static MlpModel initialised(std::size_t inputs, std::size_t outputs, const MlpHyper& hyper,
                                std::uint64_t seed);

    int epochs_trained = 0;

private:
    std::vector<DenseLayer> layers_;
    Activation activation_ = Activation::Relu;
    std::vector<double> target_mean_;
    std::vector<double> target_scale_;
};

/// Mean-squared-error loss 0.5 * mean ||f(x) - y||^2 + 0.5 * alpha * ||W||^2 / n
/// on raw network outputs (targets already standardised), and its gradient
/// with respect to MlpModel::parameters().
double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, const Matrix& y, double alpha,
                             std::vector<double>& gradient);

/// Mini-batch Adam on standardised targets with optional early stopping on a
/// held-out split. Deterministic given `seed`. Throws NumericalError when the
/// loss stops being finite, std::invalid_argument for fewer than 2 rows.
MlpModel fit_mlp(const Matrix& x, const Matrix& y, const MlpHyper& hyper, std::uint64_t seed);

struct KFoldResult {
    std::vector<double> rmse;  ///< per target, pooled over all folds
    double mean_rmse = 0.0;    ///< average across targets
};

using FitFn = std::function<std::unique_ptr<Regressor>(const Matrix& x, const Matrix& y)>;

/// Seeded shuffle, k contiguous folds, out-of-fold RMSE pooled over all rows.
/// Throws std::invalid_argument when rows < k or k < 2.
KFoldResult kfold_rmse(const FitFn& fit, const Matrix& x, const Matrix& y, std::size_t k,
                       std::uint64_t seed, std::size_t workers = 1);

struct GridSearchResult {
    MlpHyper best;
    double best_rmse = 0.0;
    std::vector<std::pair<MlpHyper, double>> scores;
};

/// Exhaustive grid over activation {relu, tanh} x alpha {1e-4, 1e-3} x
/// learning rate {1e-3, 1e-2}, scored by k-fold mean RMSE.
GridSearchResult grid_search_mlp(const Matrix& x, const Matrix& y, const MlpHyper& base, std::size_t k,
                                 std::uint64_t seed, std::size_t workers = 1);

/// Encoded configurations and chosen targets of all successful rows.
struct TrainingData {
    Matrix x;
    Matrix y;
};
TrainingData training_data(const Dataset& table, Target target);

/// Surrogate plus what is needed to use it later: which metric(s) it
/// predicts and the intersection order of its features.
struct SurrogateBundle {
    Target target = Target::Speed;
    std::vector<std::string> feature_ids;
    std::unique_ptr<Regressor> model;
};

void write_surrogate(const SurrogateBundle& bundle, const std::filesystem::path& path);
SurrogateBundle read_surrogate(const std::filesystem::path& path);

}  // namespace pwtl
