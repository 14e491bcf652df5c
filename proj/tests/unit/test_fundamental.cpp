#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "pwtl/error.hpp"
#include "pwtl/fundamental.hpp"
#include "pwtl/rng.hpp"

using namespace pwtl;

namespace {

std::vector<DensitySpeed> synthetic(const FdParams& p, int n, double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DensitySpeed> out;
    for (int i = 0; i < n; ++i) {
        const double rho = 0.002 + 0.15 * i / (n - 1);
        const double v = ideal_speed(p, rho) * (1.0 + noise * rng.normal());
        out.push_back({rho, v});
    }
    return out;
}

}  // namespace

TEST(Fundamental, MatchesClosedForm) {
    const FdParams p{13.68, 0.05, 1.24};
    EXPECT_EQ(ideal_speed(p, 0.0), 13.68);
    EXPECT_NEAR(ideal_speed(p, 0.05), 13.68 * std::exp(-1.0 / 1.24), 1e-12);
    for (double rho = 0.0; rho < 0.2; rho += 0.0137) {
        EXPECT_NEAR(ideal_speed(p, rho), oracle::ideal_speed(13.68, 0.05, 1.24, rho), 1e-12);
    }
}

TEST(Fundamental, StrictlyDecreasingInDensity) {
    const FdParams p = kCalibratedFd;
    double prev = ideal_speed(p, 0.0);
    for (int i = 1; i <= 400; ++i) {
        const double v = ideal_speed(p, 0.0005 * i);
        ASSERT_LT(v, prev);
        ASSERT_GT(v, 0.0);
        prev = v;
    }
}

TEST(Fundamental, InversionRoundTrips) {
    const FdParams p{11.0, 0.04, 1.7};
    for (double rho = 0.001; rho < 0.2; rho += 0.003) {
        const auto inv = invert_speed(p, ideal_speed(p, rho));
        EXPECT_FALSE(inv.clamped);
        EXPECT_NEAR(inv.density, rho, 1e-9);
    }
    for (double v = 0.5; v < 11.0; v += 0.25) {
        EXPECT_NEAR(ideal_speed(p, invert_speed(p, v).density), v, 1e-9);
    }
}

TEST(Fundamental, InversionClampsAboveFreeFlowAndRejectsNonPositive) {
    const auto inv = invert_speed(kCalibratedFd, 20.0);
    EXPECT_TRUE(inv.clamped);
    EXPECT_EQ(inv.density, 0.0);
    EXPECT_EQ(invert_speed(kCalibratedFd, 13.68).density, 0.0);
    EXPECT_THROW(invert_speed(kCalibratedFd, 0.0), std::domain_error);
    EXPECT_THROW(invert_speed(kCalibratedFd, -1.0), std::domain_error);
    EXPECT_THROW(invert_speed(kCalibratedFd, std::nan("")), std::domain_error);
}

TEST(Fundamental, CounterDensity) {
    EXPECT_DOUBLE_EQ(density_from_counter({300.0, 150.0, 10.0}), 0.05);
    EXPECT_THROW(density_from_counter({0.0, 10.0, 10.0}), std::domain_error);
    EXPECT_THROW(density_from_counter({60.0, 10.0, 0.0}), std::domain_error);
}

TEST(Fundamental, FitRecoversNoiselessParameters) {
    const FdParams truth{13.68, 0.05, 1.24};
    const auto samples = synthetic(truth, 50, 0.0, 1);
    const FitResult fit = fit_fd(samples, FdParams{10.0, 0.08, 2.0});
    EXPECT_NEAR(fit.params.v_max / truth.v_max, 1.0, 1e-4);
    EXPECT_NEAR(fit.params.rho_cr / truth.rho_cr, 1.0, 1e-4);
    EXPECT_NEAR(fit.params.a / truth.a, 1.0, 1e-4);
    EXPECT_LT(fit.sse, 1e-8);
    EXPECT_LE(fit.sse, fit.initial_sse);
}

TEST(Fundamental, FitWithFixedFreeFlowSpeed) {
    const FdParams truth{15.0, 0.04, 1.5};
    const auto samples = synthetic(truth, 40, 0.0, 2);
    const FitResult fit = fit_fd(samples, FdParams{15.0, 0.07, 1.0}, 15.0);
    EXPECT_EQ(fit.params.v_max, 15.0);
    EXPECT_NEAR(fit.params.rho_cr, 0.04, 1e-5);
    EXPECT_NEAR(fit.params.a, 1.5, 1e-4);
}

TEST(Fundamental, FitNeverWorsensTheStart) {
    const auto samples = synthetic(kCalibratedFd, 30, 0.1, 3);
    for (const FdParams init : {FdParams{13.68, 0.05, 1.24}, FdParams{30.0, 0.2, 4.0}, FdParams{5.0, 0.01, 0.5}}) {
        const FitResult fit = fit_fd(samples, init);
        EXPECT_LE(fit.sse, fd_sse(init, samples));
        EXPECT_TRUE(fit.params.valid());
    }
}

TEST(Fundamental, FitRejectsDegenerateInput) {
    std::vector<DensitySpeed> two{{0.01, 12.0}, {0.02, 11.0}};
    EXPECT_THROW(fit_fd(two), std::invalid_argument);
    std::vector<DensitySpeed> same{{0.01, 12.0}, {0.01, 11.0}, {0.01, 11.5}, {0.02, 10.0}};
    EXPECT_THROW(fit_fd(same), std::invalid_argument);
}

TEST(Fundamental, FilesRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "pwtl_fd_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "c.csv");
        out << "interval_s,count,avg_speed_mps\n300,150,10\n\n60,6,12.5\n";
    }
    const auto rows = read_counter_csv(dir / "c.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_DOUBLE_EQ(density_from_counter(rows[1]), 6.0 / (60 * 12.5));

    {
        std::ofstream out(dir / "bad.csv");
        out << "interval_s,avg_speed_mps\n300,10\n";
    }
    try {
        read_counter_csv(dir / "bad.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("count"), std::string::npos);
    }

    FitResult fit;
    fit.params = {12.5, 0.045, 1.3};
    write_fit_result(fit, dir / "fd.json");
    EXPECT_EQ(read_fd_params(dir / "fd.json"), fit.params);
}
