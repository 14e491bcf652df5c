#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "pwtl/error.hpp"
#include "pwtl/surrogate.hpp"

using namespace pwtl;

namespace {

// y_o = b_o + sum_i W[o][i] x_i exactly.
std::pair<Matrix, Matrix> planted_linear(std::size_t rows, std::size_t dim, std::size_t outs, std::uint64_t seed,
                                         std::vector<double>* w_out = nullptr) {
    Rng rng(seed);
    std::vector<double> w(outs * dim), b(outs);
    for (auto& v : w) v = rng.uniform(-3, 3);
    for (auto& v : b) v = rng.uniform(-10, 10);
    Matrix x(rows, dim), y(rows, outs);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < dim; ++i) x(r, i) = rng.uniform01();
        for (std::size_t o = 0; o < outs; ++o) {
            double v = b[o];
            for (std::size_t i = 0; i < dim; ++i) v += w[o * dim + i] * x(r, i);
            y(r, o) = v;
        }
    }
    if (w_out) {
        *w_out = w;
        w_out->insert(w_out->end(), b.begin(), b.end());
    }
    return {x, y};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

}  // namespace

TEST(Surrogate, LinearRecoversPlantedMap) {
    std::vector<double> truth;
    const auto [x, y] = planted_linear(200, 6, 2, 1, &truth);
    const LinearModel m = fit_linear(x, y);
    for (std::size_t o = 0; o < 2; ++o) {
        for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(m.weight(o, i), truth[o * 6 + i], 1e-6);
        EXPECT_NEAR(m.intercept(o), truth[12 + o], 1e-6);
    }
    EXPECT_THROW(m.predict(std::vector<double>(5, 0.0)), std::invalid_argument);
    EXPECT_THROW(fit_linear(Matrix(), Matrix()), std::invalid_argument);
}

TEST(Surrogate, LinearFoldRmseOnPlantedData) {
    const auto [x, y] = planted_linear(100, 6, 1, 2);
    const FitFn fit = [](const Matrix& a, const Matrix& b) { return std::make_unique<LinearModel>(fit_linear(a, b)); };
    const KFoldResult cv = kfold_rmse(fit, x, y, 5, 3);
    ASSERT_EQ(cv.rmse.size(), 1u);
    EXPECT_LT(cv.rmse[0], 1e-6);
    EXPECT_THROW(kfold_rmse(fit, x, y, 1, 3), std::invalid_argument);
    EXPECT_THROW(kfold_rmse(fit, x.select_rows(std::vector<std::size_t>{0, 1}), y, 5, 3), std::invalid_argument);
}

TEST(Surrogate, KFoldIsPooledAndWorkerIndependent) {
    // A mean-only model has a closed-form out-of-fold error we can recompute.
    struct MeanModel : Regressor {
        double mean = 0;
        std::size_t input_dim() const override { return 1; }
        std::size_t output_dim() const override { return 1; }
        std::vector<double> predict(std::span<const double>) const override { return {mean}; }
        std::string kind() const override { return "mean"; }
    };
    Matrix x(10, 1), y(10, 1);
    for (std::size_t r = 0; r < 10; ++r) {
        x(r, 0) = static_cast<double>(r);
        y(r, 0) = static_cast<double>(r * r);
    }
    const FitFn fit = [](const Matrix&, const Matrix& b) {
        auto m = std::make_unique<MeanModel>();
        for (double v : b.data) m->mean += v / static_cast<double>(b.rows);
        return m;
    };
    const KFoldResult a = kfold_rmse(fit, x, y, 10, 4, 1);
    const KFoldResult b = kfold_rmse(fit, x, y, 10, 4, 3);
    EXPECT_EQ(a.rmse, b.rmse);
    // Leave-one-out: prediction for row r is the mean of the others.
    double sse = 0;
    double total = 0;
    for (std::size_t r = 0; r < 10; ++r) total += y(r, 0);
    for (std::size_t r = 0; r < 10; ++r) {
        const double pred = (total - y(r, 0)) / 9.0;
        sse += (pred - y(r, 0)) * (pred - y(r, 0));
    }
    EXPECT_NEAR(a.rmse[0], std::sqrt(sse / 10.0), 1e-12);
}

TEST(Surrogate, MlpGradientMatchesFiniteDifferences) {
    for (const Activation act : {Activation::Relu, Activation::Tanh}) {
        MlpHyper h;
        h.hidden = {7, 5};
        h.activation = act;
        MlpModel m = MlpModel::initialised(4, 2, h, 21);
        Rng rng(5);
        Matrix x(9, 4), y(9, 2);
        for (auto& v : x.data) v = rng.uniform01();
        for (auto& v : y.data) v = rng.normal();
        std::vector<double> grad;
        mlp_loss_and_gradient(m, x, y, 0.01, grad);
        const std::vector<double> p0 = m.parameters();
        ASSERT_EQ(grad.size(), p0.size());
        ASSERT_EQ(p0.size(), m.parameter_count());
        std::vector<double> scratch;
        for (std::size_t k = 0; k < p0.size(); ++k) {
            const double eps = 1e-6;
            std::vector<double> p = p0;
            p[k] = p0[k] + eps;
            m.set_parameters(p);
            const double up = mlp_loss_and_gradient(m, x, y, 0.01, scratch);
            p[k] = p0[k] - eps;
            m.set_parameters(p);
            const double down = mlp_loss_and_gradient(m, x, y, 0.01, scratch);
            const double numeric = (up - down) / (2 * eps);
            EXPECT_LT(rel_err(grad[k], numeric), 1e-4) << to_string(act) << " parameter " << k;
        }
        m.set_parameters(p0);
    }
}

TEST(Surrogate, MlpLearnsXor) {
    Matrix x(100, 2), y(100, 1);
    for (std::size_t r = 0; r < 100; ++r) {
        const int a = static_cast<int>(r % 2), b = static_cast<int>((r / 2) % 2);
        x(r, 0) = a;
        x(r, 1) = b;
        y(r, 0) = a ^ b;
    }
    MlpHyper h;
    h.learning_rate = 1e-2;
    h.early_stopping = false;
    h.max_epochs = 300;
    const MlpModel m = fit_mlp(x, y, h, 1);
    double sse = 0;
    for (std::size_t r = 0; r < 100; ++r) {
        const double e = m.predict(x.row(r))[0] - y(r, 0);
        sse += e * e;
    }
    EXPECT_LT(std::sqrt(sse / 100), 0.1);

    const LinearModel lin = fit_linear(x, y);
    EXPECT_NEAR(lin.predict(std::vector<double>{0, 0})[0], 0.5, 1e-6);
}

TEST(Surrogate, MlpIsDeterministicAndUsesOriginalUnits) {
    const auto [x, y] = planted_linear(120, 3, 2, 8);
    Matrix scaled = y;
    for (auto& v : scaled.data) v = 1000.0 + 50.0 * v;
    MlpHyper h;
    h.hidden = {20};
    h.max_epochs = 200;
    const MlpModel a = fit_mlp(x, scaled, h, 3);
    const MlpModel b = fit_mlp(x, scaled, h, 3);
    EXPECT_EQ(a.parameters(), b.parameters());
    EXPECT_GT(a.epochs_trained, 0);
    double sse = 0, var = 0, mean = 0;
    for (std::size_t r = 0; r < x.rows; ++r) mean += scaled(r, 0) / static_cast<double>(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double e = a.predict(x.row(r))[0] - scaled(r, 0);
        sse += e * e;
        var += (scaled(r, 0) - mean) * (scaled(r, 0) - mean);
    }
    EXPECT_LT(sse / var, 0.05);  // R^2 > 0.95
    EXPECT_THROW(fit_mlp(x.select_rows(std::vector<std::size_t>{0}), y.select_rows(std::vector<std::size_t>{0}),
                         h, 1),
                 std::invalid_argument);
}

TEST(Surrogate, GridSearchCoversEightCandidates) {
    const auto [x, y] = planted_linear(40, 2, 1, 6);
    MlpHyper h;
    h.hidden = {8};
    h.max_epochs = 20;
    const GridSearchResult g = grid_search_mlp(x, y, h, 3, 1);
    EXPECT_EQ(g.scores.size(), 8u);
    double best = 1e300;
    for (const auto& [hp, score] : g.scores) best = std::min(best, score);
    EXPECT_EQ(g.best_rmse, best);
}

TEST(Surrogate, TrainingDataSkipsFailedRows) {
    Dataset t;
    t.intersection_ids = {"a"};
    t.rows = {{0, 1, {{20, 54, 0}}, 8.0, 12.0, "ok"},
              {1, 2, {{54, 20, 73}}, std::nan(""), std::nan(""), "failed: x"},
              {2, 3, {{37, 37, 73}}, 9.0, 10.0, "ok"}};
    const TrainingData td = training_data(t, Target::Both);
    ASSERT_EQ(td.x.rows, 2u);
    EXPECT_EQ(td.x(0, 0), 0.0);
    EXPECT_EQ(td.x(0, 1), 1.0);
    EXPECT_EQ(td.x(1, 0), 0.5);
    EXPECT_EQ(td.x(1, 2), 1.0);
    EXPECT_EQ(td.y(1, 0), 9.0);
    EXPECT_EQ(td.y(1, 1), 10.0);
    EXPECT_EQ(training_data(t, Target::Queue).y(0, 0), 12.0);
}

TEST(Surrogate, ModelFilesRoundTrip) {
    const auto dir = test::scratch_dir("surrogate");
    const auto [x, y] = planted_linear(50, 6, 2, 9);
    {
        SurrogateBundle b{Target::Both, {"j1", "j2"}, std::make_unique<LinearModel>(fit_linear(x, y))};
        write_surrogate(b, dir / "lin.json");
        const SurrogateBundle back = read_surrogate(dir / "lin.json");
        EXPECT_EQ(back.target, Target::Both);
        EXPECT_EQ(back.feature_ids, b.feature_ids);
        EXPECT_EQ(back.model->kind(), "linear");
        for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(back.model->predict(x.row(r)), b.model->predict(x.row(r)));
    }
    {
        MlpHyper h;
        h.hidden = {6, 4};
        h.max_epochs = 5;
        SurrogateBundle b{Target::Both, {"j1", "j2"}, std::make_unique<MlpModel>(fit_mlp(x, y, h, 2))};
        write_surrogate(b, dir / "mlp.json");
        const SurrogateBundle back = read_surrogate(dir / "mlp.json");
        EXPECT_EQ(back.model->kind(), "mlp");
        for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(back.model->predict(x.row(r)), b.model->predict(x.row(r)));
    }
    {
        SurrogateBundle b{Target::Speed, {"j1"}, std::make_unique<LinearModel>(fit_linear(x, y))};
        write_surrogate(b, dir / "mismatch.json");
        EXPECT_THROW(read_surrogate(dir / "mismatch.json"), ParseError);
    }
    EXPECT_THROW(parse_target("both_"), std::invalid_argument);
    EXPECT_THROW(parse_activation("sigmoid"), std::invalid_argument);
}
