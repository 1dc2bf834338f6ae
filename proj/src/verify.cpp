#include "mlbfgs/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mlbfgs/damping.hpp"
#include "mlbfgs/ema.hpp"
#include "mlbfgs/errors.hpp"
#include "mlbfgs/history_buffer.hpp"
#include "mlbfgs/metrics.hpp"
#include "mlbfgs/objectives.hpp"
#include "mlbfgs/optimizers.hpp"
#include "mlbfgs/rng.hpp"

namespace mlbfgs {

bool VerifyReport::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

VerifyCheck& VerifyReport::add(const std::string& name, double measured, double expected,
                               double tolerance, VerifyCheck::Kind kind) {
    VerifyCheck c{name, measured, expected, tolerance, kind, false};
    switch (kind) {
        case VerifyCheck::Kind::WithinRel:
            c.pass = std::isfinite(measured) &&
                     std::abs(measured - expected) <= tolerance * std::abs(expected);
            break;
        case VerifyCheck::Kind::AtLeast:
            c.pass = measured >= expected - tolerance;
            break;
        case VerifyCheck::Kind::AtMost:
            c.pass = measured <= expected + tolerance;
            break;
        case VerifyCheck::Kind::MustExceed:
            c.pass = !(measured <= expected);  // sensitivity control: must break the bound
            break;
    }
    checks.push_back(std::move(c));
    return checks.back();
}

// ---------------------------------------------------------------------------

namespace {

// One accumulation step acc <- beta acc + (1-beta)(signal + n) with i.i.d.
// +-eps noise unpacked from stream bits: zero mean, variance exactly eps^2,
// and three orders of magnitude cheaper than transcendental draws. The
// attenuation claims are second-moment algebra, so the distribution shape is
// immaterial here; the Gaussian case and the EmaState code path are exercised
// in the unit tests.
void blend_noisy_signal(RngStream& rng, FlatVector& acc, double beta, double signal,
                        double eps) {
    const double w = 1.0 - beta;
    const double lut[2] = {w * (signal - eps), w * (signal + eps)};
    std::size_t i = 0;
    const std::size_t n = acc.dim();
    double* a = acc.data();
    while (i < n) {
        std::uint64_t bits = rng.next_u64();
        for (int b = 0; b < 64 && i < n; ++b, ++i) {
            a[i] = beta * a[i] + lut[(bits >> b) & 1ULL];
        }
    }
}

void fill_noisy_signal(RngStream& rng, FlatVector& out, double signal, double eps) {
    out.fill(0.0);
    blend_noisy_signal(rng, out, 0.0, signal, eps);
}

}  // namespace

VerifyReport verify_lemma1(double beta, double eps, long steps, std::size_t trials,
                           std::uint64_t seed) {
    VerifyReport rep{"lemma1(beta=" + std::to_string(beta) + ")", {}};
    const double expected_var = (1.0 - beta) / (1.0 + beta) * eps * eps;
    const double pair_bound = 4.0 * (1.0 - beta) / (1.0 + beta) * eps * eps;

    // Many independent coordinates run the gradient-accumulator recurrence;
    // the excess variance is read at well-separated checkpoints in the mixed
    // half of the run. Initialization matches the t = 0 rule: the accumulator
    // starts at the first noisy observation.
    RngStream rng(seed);
    const double signal = 2.0;
    FlatVector acc(trials);
    fill_noisy_signal(rng, acc, signal, eps);

    const int checkpoints = 20;
    const long spacing = std::max<long>(steps / (2 * checkpoints), 1);
    const long first = steps - spacing * checkpoints;
    std::vector<FlatVector> snaps;
    for (long t = 1; t <= steps; ++t) {
        blend_noisy_signal(rng, acc, beta, signal, eps);
        if (t >= first && (t - first) % spacing == 0) snaps.push_back(acc);
    }

    double var_acc = 0.0;
    for (const auto& snap : snaps) {
        double v = 0.0;
        for (std::size_t i = 0; i < trials; ++i) {
            v += (snap[i] - signal) * (snap[i] - signal);
        }
        var_acc += v / static_cast<double>(trials);
    }
    const double ema_var = var_acc / static_cast<double>(snaps.size());
    rep.add("ema_noise_variance", ema_var, expected_var, 0.10, VerifyCheck::Kind::WithinRel);

    // Window differences of the accumulator over the same checkpoints.
    double yvar = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
        for (std::size_t i = 0; i < trials; ++i) {
            const double y = snaps[k][i] - snaps[k - 1][i];
            yvar += y * y;
            ++count;
        }
    }
    yvar /= static_cast<double>(count);
    rep.add("pair_noise_variance_bound", yvar, 1.15 * pair_bound, 0.0, VerifyCheck::Kind::AtMost);
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Max secant residual ||y - B s|| / ||B s|| across window pairs formed along
// a gradient-descent trace on a diagonal quadratic.
double secant_residual(const std::vector<double>& diag, double noise_sigma, std::uint64_t seed,
                       int windows) {
    const std::size_t d = diag.size();
    const int period = 5;
    const double lr = 0.1;
    RngStream rng(seed);
    FlatVector theta(d, 1.0);
    auto grad_of = [&](const FlatVector& th) {
        FlatVector g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = diag[i] * th[i];
        if (noise_sigma > 0.0) g.add(rng.gaussian_vector(d, noise_sigma));
        return g;
    };
    EmaState st(theta, grad_of(theta), 0.9);
    double worst = 0.0;
    for (int t = 1; t <= period * (windows + 1); ++t) {
        FlatVector g = grad_of(theta);
        st.update(theta, g);
        theta.add_scaled(g, -lr);
        if (t % period == 0) {
            if (t == period) {
                st.take_snapshot();
                continue;
            }
            auto [s, y] = st.form_pair();
            FlatVector bs(d);
            for (std::size_t i = 0; i < d; ++i) bs[i] = diag[i] * s[i];
            worst = std::max(worst, norm(y - bs) / norm(bs));
        }
    }
    return worst;
}

}  // namespace

VerifyReport verify_lemma2(std::uint64_t seed) {
    VerifyReport rep{"lemma2", {}};
    const std::vector<double> diag{1.0, 2.0, 5.0};
    rep.add("noise_free_secant_residual", secant_residual(diag, 0.0, seed, 5), 1e-10, 0.0,
            VerifyCheck::Kind::AtMost);
    // Sensitivity control: with gradient noise the identity must break.
    rep.add("noisy_negative_control", secant_residual(diag, 0.1, seed + 1, 5), 1e-10, 0.0,
            VerifyCheck::Kind::MustExceed);
    return rep;
}

// ---------------------------------------------------------------------------

VerifyReport verify_damping(std::uint64_t seed) {
    VerifyReport rep{"damping", {}};
    DampingConfig cfg{0.01, 1.5, 0.99};
    RngStream rng(seed);
    double worst_low = 0.0, worst_high = 0.0, worst_clamp = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 2 + rng.next_u64() % 7;
        const double mu = -10.0 + 20.0 * rng.next_unit();
        FlatVector s = rng.gaussian_vector(d, 1.0);
        if (squared_norm(s) == 0.0) s[0] = 1.0;
        FlatVector w = rng.gaussian_vector(d, 1.0);
        w.add_scaled(s, -dot(w, s) / dot(s, s));
        FlatVector y = s;
        y.scale(mu);
        y.add(w);
        auto res = damp_pair(s, y, cfg);
        const double ratio = dot(s, res.y_hat) / dot(s, s);
        worst_low = std::max(worst_low, cfg.sigma_lo - ratio);
        worst_high = std::max(worst_high, ratio - cfg.sigma_hi);
        if (mu <= cfg.sigma_lo && res.tau < cfg.tau0) {
            worst_clamp = std::max(worst_clamp, std::abs(ratio - cfg.sigma_lo));
        }
        if (mu >= cfg.sigma_hi && res.tau < cfg.tau0) {
            worst_clamp = std::max(worst_clamp, std::abs(ratio - cfg.sigma_hi));
        }
    }
    rep.add("band_violation_below", worst_low, 1e-12, 0.0, VerifyCheck::Kind::AtMost);
    rep.add("band_violation_above", worst_high, 1e-12, 0.0, VerifyCheck::Kind::AtMost);
    rep.add("clamp_exactness", worst_clamp, 1e-12, 0.0, VerifyCheck::Kind::AtMost);
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

void spectral_band_case(VerifyReport& rep, RngStream& rng, const DampingConfig& cfg,
                        std::size_t history, const std::string& tag) {
    const double lo = 1.0 / cfg.sigma_hi;
    const double hi = static_cast<double>(history + 1) / cfg.sigma_lo;
    double min_seen = 1e300, max_seen = -1e300;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 3 + rng.next_u64() % 10;
        HistoryBuffer buf(history);
        const std::size_t k = 1 + rng.next_u64() % history;
        for (std::size_t i = 0; i < k; ++i) {
            FlatVector s = rng.gaussian_vector(d, 1.0);
            if (squared_norm(s) == 0.0) s[0] = 1.0;
            FlatVector y = s;
            y.scale(-10.0 + 20.0 * rng.next_unit());
            auto damped = damp_pair(s, y, cfg);
            buf.push(std::move(s), std::move(damped.y_hat));
        }
        for (int probe = 0; probe < 100; ++probe) {
            FlatVector g = rng.gaussian_vector(d, 1.0);
            FlatVector hg = two_loop_apply(buf, g);
            const double q = dot(g, hg) / dot(g, g);
            min_seen = std::min(min_seen, q);
            max_seen = std::max(max_seen, q);
        }
    }
    rep.add("rayleigh_min_" + tag, min_seen, lo, 1e-9, VerifyCheck::Kind::AtLeast);
    rep.add("rayleigh_max_" + tag, max_seen, hi, 1e-9, VerifyCheck::Kind::AtMost);
}

}  // namespace

VerifyReport verify_spectral(std::uint64_t seed) {
    VerifyReport rep{"spectral", {}};
    RngStream rng(seed);
    spectral_band_case(rep, rng, {0.01, 1.5, 0.99}, 10, "default_band");
    spectral_band_case(rep, rng, {0.5, 1.5, 0.99}, 4, "narrow_band");
    return rep;
}

// ---------------------------------------------------------------------------

VerifyReport verify_rate(std::uint64_t seed) {
    (void)seed;  // deterministic by design: full-batch gradients
    VerifyReport rep{"rate", {}};
    MlbfgsConfig cfg;
    cfg.update_period = 10;
    cfg.history = 4;
    cfg.beta = 0.9;
    cfg.step_momentum = 0.0;
    cfg.damping = {0.5, 1.5, 0.99};

    const double lambda = 1.0, Lambda = 1.0;
    const double xi = 1.0 / cfg.damping.sigma_hi;
    const double Xi = static_cast<double>(cfg.history + 1) / cfg.damping.sigma_lo;
    const double eta = 0.005;
    const double alpha = 1.0 - eta * lambda * xi + eta * eta * Lambda * Lambda * Xi * Xi;
    rep.add("rate_constant", alpha, 1.0 - 0.005 * (2.0 / 3.0) + 0.0025, 1e-12,
            VerifyCheck::Kind::WithinRel);
    const double eta_max = lambda * xi / (Lambda * Lambda * Xi * Xi);
    if (!(eta > 0.0 && eta < eta_max)) {
        throw std::invalid_argument("verify_rate: eta gives alpha >= 1; maximal admissible eta is " +
                                    std::to_string(eta_max));
    }

    auto obj = QuadraticObjective::identity(4, 0.0);
    FlatVector theta(std::vector<double>{2.0, -1.5, 1.0, 0.5});
    MlbfgsBlockOptimizer opt(cfg, theta, obj.exact_grad(theta));
    const long warm = cfg.warmup_iters();
    double anchor = 0.0;
    double worst_ratio = 0.0;
    for (long t = 1; t <= warm + 500; ++t) {
        theta = opt.step(theta, obj.exact_grad(theta), t, eta).theta_next;
        if (t == warm) anchor = obj.ref_loss(theta);
        if (t > warm) {
            const double envelope = std::pow(alpha, static_cast<double>(t - warm)) * anchor;
            worst_ratio = std::max(worst_ratio, obj.ref_loss(theta) / envelope);
        }
    }
    rep.add("envelope_max_ratio", worst_ratio, 1.0, 1e-9, VerifyCheck::Kind::AtMost);
    return rep;
}

// ---------------------------------------------------------------------------

VerifyReport verify_noise_floor(std::uint64_t seed) {
    VerifyReport rep{"floor", {}};
    const double alpha = 4.0, eps = 0.2, lambda = 1.0, Lambda = 1.0;
    const double floor = (alpha - 2.0) * (alpha - 2.0) * lambda / (2.0 * Lambda * Lambda) * eps *
                         eps;
    rep.add("floor_formula", floor, 0.08, 1e-12, VerifyCheck::Kind::WithinRel);
    rep.add("floor_formula_alt",
            (2.5 - 2.0) * (2.5 - 2.0) * 1.0 / (2.0 * 2.0 * 2.0) * 0.2 * 0.2, 0.00125, 1e-12,
            VerifyCheck::Kind::WithinRel);

    // Load-bearing consequence of the selection rule, exact under noise with
    // ||n|| <= eps: an admissible pair forces ||s|| >= (alpha-2) eps / Lambda
    // by Cauchy-Schwarz, and the floor is lambda/2 times that length squared.
    RngStream rng(seed);
    const double min_len = (alpha - 2.0) * eps / Lambda;
    double worst_accepted = 1e300;
    const std::size_t d = 4;
    for (int i = 0; i < 100000; ++i) {
        FlatVector s = rng.gaussian_vector(d, 1.0);
        s.scale(std::pow(10.0, -2.0 + 3.0 * rng.next_unit()) / norm(s));
        FlatVector n = rng.gaussian_vector(d, 1.0);
        n.scale(2.0 * eps * rng.next_unit() / norm(n));  // ||dn|| <= 2 eps
        FlatVector y = s;  // curvature exactly B = I
        y.add(n);
        if (pair_filter(s, y, alpha, eps)) {
            worst_accepted = std::min(worst_accepted, norm(s));
        }
    }
    rep.add("admissible_step_length", worst_accepted, min_len, 1e-12,
            VerifyCheck::Kind::AtLeast);

    // Spec-pinned trajectory form: raw-pair history with the filter as sole
    // admission rule, 20 seeds, tail = final 10% of 1000 iterations. On a
    // stationary noisy quadratic the filter starves once windows shrink below
    // alpha*eps, the model freezes to descent-phase pairs, and the iterate
    // settles at the small-step noise level far below the floor. The check is
    // kept as stated and is expected to fail; the selection-rate check below
    // documents the starved premise. See the verification notes in README.
    const long iters = 1000;
    const int seeds = 20;
    const double lr = 1.0;
    const double sigma = eps / std::sqrt(2.0);  // E||n||^2 = eps^2 in d = 2
    double tail_mean = 0.0;
    double select_rate = 0.0;
    for (int s = 0; s < seeds; ++s) {
        auto obj = QuadraticObjective::identity(2, sigma);
        VanillaLbfgsOptimizer opt(10, {true, alpha, eps});
        RngStream iter_root = RngStream(seed + static_cast<std::uint64_t>(s)).split(0);
        FlatVector theta(std::vector<double>{-2.5, 2.0});
        double tail = 0.0;
        int tail_n = 0;
        for (long t = 1; t <= iters; ++t) {
            auto lg = obj.replicated_eval(theta, iter_root.split(static_cast<std::uint64_t>(t)));
            theta = opt.step(theta, lg.grad, lr);
            if (!theta.all_finite()) {
                tail = 1e12;
                tail_n = 1;
                break;
            }
            if (t > iters - iters / 10) {
                tail += obj.ref_loss(theta);
                ++tail_n;
            }
        }
        tail_mean += tail / tail_n;
        select_rate += static_cast<double>(opt.pairs_accepted()) /
                       static_cast<double>(std::max<std::size_t>(opt.pairs_seen(), 1));
    }
    tail_mean /= seeds;
    select_rate /= seeds;
    rep.add("tail_loss_above_floor", tail_mean, floor, 0.0, VerifyCheck::Kind::AtLeast);
    rep.add("selection_premise_active", select_rate, 0.5, 0.0, VerifyCheck::Kind::AtLeast);
    return rep;
}

// ---------------------------------------------------------------------------

VerifyReport verify_grad_variance(std::uint64_t seed) {
    VerifyReport rep{"variance", {}};
    const std::size_t n = 512, d = 8;
    const double Lambda = 1.0;
    RngStream rng(seed);

    // Per-sample losses 0.5||theta - x_i||^2; Lambda-smooth with Lambda = 1
    // and zero attainable per-sample minimum.
    std::vector<FlatVector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.gaussian_vector(d, 1.0));
    FlatVector theta = rng.gaussian_vector(d, 1.0);

    auto full_loss = [&](const FlatVector& th) {
        double acc = 0.0;
        for (const auto& x : xs) acc += 0.5 * squared_norm(th - x);
        return acc / static_cast<double>(n);
    };
    auto batch_grad = [&](const FlatVector& th, const std::vector<std::size_t>& idx) {
        FlatVector g(d);
        for (std::size_t i : idx) g.add(th - xs[i]);
        g.scale(1.0 / static_cast<double>(idx.size()));
        return g;
    };

    const double big_l = full_loss(theta);

    // Equality case: identical samples make the minibatch gradient
    // deterministic with E||g||^2 = 2 L exactly.
    {
        FlatVector x0 = xs[0];
        FlatVector g = theta - x0;
        const double loss = 0.5 * squared_norm(g);
        rep.add("identical_data_equality", squared_norm(g), 2.0 * Lambda * loss, 1e-12,
                VerifyCheck::Kind::WithinRel);
    }

    // Monte Carlo over b = 1 batches.
    {
        const int trials = 4000;
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) {
            std::vector<std::size_t> idx{rng.next_u64() % n};
            acc += squared_norm(batch_grad(theta, idx));
        }
        acc /= trials;
        const double bound = 2.0 * Lambda * big_l * (1.0 + 3.0 / std::sqrt(trials));
        rep.add("minibatch_second_moment", acc, bound, 0.0, VerifyCheck::Kind::AtMost);
    }

    // Full batch: plain smoothness bound on the exact gradient.
    {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        rep.add("full_batch_smoothness", squared_norm(batch_grad(theta, all)),
                2.0 * Lambda * big_l, 1e-12, VerifyCheck::Kind::AtMost);
    }
    return rep;
}

// ---------------------------------------------------------------------------

std::vector<VerifyReport> run_verify_suites(const std::string& name, std::uint64_t seed) {
    std::vector<VerifyReport> out;
    const bool all = name == "all";
    if (all || name == "lemma1") {
        for (double beta : {0.9, 0.99, 0.999}) {
            out.push_back(verify_lemma1(beta, 1.0, 100000, 10000, seed));
        }
    }
    if (all || name == "lemma2") out.push_back(verify_lemma2(seed));
    if (all || name == "damping") out.push_back(verify_damping(seed));
    if (all || name == "spectral") out.push_back(verify_spectral(seed));
    if (all || name == "rate") out.push_back(verify_rate(seed));
    if (all || name == "floor") out.push_back(verify_noise_floor(seed));
    if (all || name == "variance") out.push_back(verify_grad_variance(seed));
    if (out.empty()) {
        throw ConfigError("suite", "unknown suite '" + name +
                                       "'; expected lemma1, lemma2, damping, spectral, rate, "
                                       "floor, variance or all");
    }
    return out;
}

std::string verify_reports_to_csv(const std::vector<VerifyReport>& reports) {
    std::ostringstream out;
    out << "suite,check,measured,expected,tolerance,pass\n";
    for (const auto& rep : reports) {
        for (const auto& c : rep.checks) {
            out << rep.suite << ',' << c.name << ',' << format_double(c.measured) << ','
                << format_double(c.expected) << ',' << format_double(c.tolerance) << ','
                << (c.pass ? 1 : 0) << "\n";
        }
    }
    return out.str();
}

void print_verify_reports(const std::vector<VerifyReport>& reports) {
    for (const auto& rep : reports) {
        for (const auto& c : rep.checks) {
            std::printf("[%s] %s/%s: measured=%.6g expected=%.6g tol=%.3g\n",
                        c.pass ? "PASS" : "FAIL", rep.suite.c_str(), c.name.c_str(), c.measured,
                        c.expected, c.tolerance);
        }
    }
}

}  // namespace mlbfgs
