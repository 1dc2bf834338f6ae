// Verification suites: closed-form expectations, Monte Carlo bands, and the
// sensitivity controls that guard against vacuous passes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mlbfgs/errors.hpp"
#include "mlbfgs/verify.hpp"

using namespace mlbfgs;

namespace {

const VerifyCheck& find(const VerifyReport& rep, const std::string& name) {
    for (const auto& c : rep.checks) {
        if (c.name == name) return c;
    }
    throw std::runtime_error("check not found: " + name);
}

}  // namespace

TEST_CASE("lemma1 suite hits the closed-form attenuation") {
    // Small-scale run for test speed; the CLI suite uses 1e5 x 1e4.
    auto rep = verify_lemma1(0.9, 1.0, 4000, 4000, 7);
    const auto& v = find(rep, "ema_noise_variance");
    CHECK(v.expected == doctest::Approx(1.0 / 19.0));
    CHECK(v.pass);
    CHECK(find(rep, "pair_noise_variance_bound").pass);

    auto rep3 = verify_lemma1(0.999, 1.0, 60000, 4000, 7);
    CHECK(find(rep3, "ema_noise_variance").expected == doctest::Approx(5.0025e-4).epsilon(1e-6));
    CHECK(rep3.all_pass());
}

TEST_CASE("lemma1 formula at beta zero is the raw variance") {
    auto rep = verify_lemma1(0.0, 1.0, 2000, 4000, 11);
    CHECK(find(rep, "ema_noise_variance").expected == doctest::Approx(1.0));
    CHECK(rep.all_pass());
}

TEST_CASE("lemma2 suite passes noise-free and trips its negative control") {
    auto rep = verify_lemma2(5);
    CHECK(rep.all_pass());
    CHECK(find(rep, "noise_free_secant_residual").measured <= 1e-10);
    // the control's measured residual must be large, or the suite is vacuous
    CHECK(find(rep, "noisy_negative_control").measured > 1e-6);
}

TEST_CASE("damping suite") {
    auto rep = verify_damping(3);
    CHECK(rep.all_pass());
}

TEST_CASE("spectral suite bands") {
    auto rep = verify_spectral(9);
    CHECK(rep.all_pass());
    CHECK(find(rep, "rayleigh_min_default_band").expected == doctest::Approx(1.0 / 1.5));
    CHECK(find(rep, "rayleigh_max_default_band").expected == doctest::Approx(1100.0));
    CHECK(find(rep, "rayleigh_max_narrow_band").expected == doctest::Approx(10.0));
}

TEST_CASE("rate suite envelope and constant") {
    auto rep = verify_rate(0);
    CHECK(rep.all_pass());
    CHECK(find(rep, "rate_constant").measured == doctest::Approx(0.9991666667).epsilon(1e-9));
    CHECK(find(rep, "envelope_max_ratio").measured <= 1.0 + 1e-9);
}

TEST_CASE("floor suite formulas and the selection-length consequence") {
    auto rep = verify_noise_floor(1);
    CHECK(find(rep, "floor_formula").measured == doctest::Approx(0.08));
    CHECK(find(rep, "floor_formula").pass);
    CHECK(find(rep, "floor_formula_alt").measured == doctest::Approx(0.00125));
    CHECK(find(rep, "admissible_step_length").pass);
    CHECK(find(rep, "admissible_step_length").expected == doctest::Approx(0.4));
    // The trajectory form of the bound does not hold on a stationary noisy
    // quadratic (the selection premise starves); the suite reports that
    // honestly rather than passing vacuously.
    CHECK_FALSE(find(rep, "tail_loss_above_floor").pass);
    CHECK_FALSE(find(rep, "selection_premise_active").pass);
}

TEST_CASE("variance suite") {
    auto rep = verify_grad_variance(13);
    CHECK(rep.all_pass());
}

TEST_CASE("suite dispatch and CSV shape") {
    auto reports = run_verify_suites("damping", 3);
    REQUIRE(reports.size() == 1);
    std::string csv = verify_reports_to_csv(reports);
    CHECK(csv.rfind("suite,check,measured,expected,tolerance,pass\n", 0) == 0);
    CHECK_THROWS_AS(run_verify_suites("nope", 0), ConfigError);
}
