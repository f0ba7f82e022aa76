// Acceptance checks: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/beamformer.hpp"
#include "uwbeam/channel.hpp"
#include "uwbeam/harness/config.hpp"
#include "uwbeam/harness/experiment.hpp"
#include "uwbeam/noise.hpp"
#include "uwbeam/pulse.hpp"
#include "uwbeam/receiver.hpp"

using namespace uwbeam;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = kPi / 180.0;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // 0: no bound
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
}

void note(Outcome& o, const std::string& s) { o.detail += (o.detail.empty() ? "" : "; ") + s; }

double peak_abs(const CVec& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

// 1. Weights: unit norm in band, exact zeros out of band, occupied bin count.
Outcome beamformer_contract() {
    Outcome o;
    for (Profile p : {Profile::Space, Profile::Mace}) {
        const auto cfg = default_config(p);
        const BinGrid g = bin_grid(cfg);
        const std::size_t half = static_cast<std::size_t>(
            std::ceil(static_cast<double>(g.L) * (1.0 + g.alpha_rc) / (2.0 * g.Ns)));
        const std::size_t expected = 2 * half + 1;
        double worst = 0.0;
        bool zeros = true;
        std::size_t occupied = 0;
        for (double theta : {-40.0, 0.0, 12.5, 33.0}) {
            const auto w = design_single_beam(cfg.array, theta * kDeg, g);
            occupied = 0;
            for (std::size_t l = 0; l < g.L; ++l) {
                double e = 0.0;
                for (auto v : w.bin(l)) e += std::norm(v);
                if (g.in_band(l)) {
                    ++occupied;
                    worst = std::max(worst, std::abs(std::sqrt(e) - 1.0));
                } else {
                    for (auto v : w.bin(l)) zeros = zeros && v == cplx{};
                }
            }
        }
        note(o, fmt("%s: |L_B| = %zu (formula %zu), max | ||Phi|| - 1 | = %.1e", to_string(p).c_str(), occupied,
                    expected, worst));
        require(o, worst < 1e-12, "unit norm within 1e-12");
        require(o, zeros, "off-band bins exactly zero");
        require(o, occupied == expected, "occupied bin count");
        if (p == Profile::Space) require(o, occupied == 855, "SPACE: 855 occupied bins");
    }
    return o;
}

// 2. Single path at the steered angle, noiseless: received pulse vs sqrt(M) c0 g(t - tau0),
//    compared over the occupied bins of the beamformer's L-point grid.
Outcome coherent_gain() {
    Outcome o;
    for (Profile p : {Profile::Space, Profile::Mace}) {
        const auto cfg = default_config(p);
        const BinGrid grid = bin_grid(cfg);
        const PulseSpec pulse = cfg.pulse;
        const double theta0 = -17.0 * kDeg;
        const auto filters = synthesize_time_filters(design_single_beam(cfg.array, theta0, grid));
        ChannelSpec spec;
        spec.geom = cfg.array;
        spec.fc = cfg.fc;
        PathSpec path;
        path.gain = 0.9;
        path.tau0 = 1.234e-3;
        path.theta = theta0;
        spec.paths = {path};
        const CVec sym{cplx(1.0, 0.0)};
        const auto tx = apply_transmit_beamforming(sym, pulse, filters);
        const auto rx = propagate_paths(tx, spec, 0.0).front();

        const CVec rf = oracle::naive_dft(oracle::fold(rx, grid.L), grid.L, -1);
        const RVec taps = raised_cosine_taps(pulse);
        const ComplexBasebandSignal g(CVec(taps.begin(), taps.end()), cfg.fs,
                                      -static_cast<double>(pulse.center_tap()) / cfg.fs);
        const cplx c0 = element_path_params(spec, 0, 0).gain;
        const double rootM = std::sqrt(static_cast<double>(cfg.array.M));
        CVec got, want;
        for (std::size_t l : grid.band_bins()) {
            const double f = grid.bin_frequency(l) - grid.fc;
            got.push_back(rf[l]);
            want.push_back(rootM * c0 * oracle::dtft(g, f) * std::polar(1.0, -kTwoPi * f * path.tau0));
        }
        const double err = oracle::relative_rms(got, want);
        note(o, fmt("%s (M = %d): relative RMS %.1e", to_string(p).c_str(), cfg.array.M, err));
        require(o, err < 1e-6, "relative RMS < 1e-6");
    }
    return o;
}

// 3. Principal + interference + noise reconstructs the propagate output.
Outcome decomposition_identity() {
    Outcome o;
    const auto cfg = default_config(Profile::Space);
    ChannelSpec spec;
    spec.geom = cfg.array;
    spec.fc = cfg.fc;
    const double gains[] = {1.0, 0.6, 0.4}, taus[] = {1.3e-3, 2.1e-3, 3.4e-3}, angles[] = {4.0, -12.0, 21.0};
    for (int p = 0; p < 3; ++p) {
        PathSpec ps;
        ps.gain = gains[p];
        ps.tau0 = taus[p];
        ps.theta = angles[p] * kDeg;
        ps.drift.slope = p == 1 ? 1e-4 : 0.0;
        spec.paths.push_back(ps);
    }
    spec.snr_db = 15.0;
    spec.seed = 99;
    const auto filters = synthesize_time_filters(design_single_beam(cfg.array, 4.0 * kDeg, bin_grid(cfg)));
    const CVec sym = random_symbols(300, Constellation::BPSK, 3);
    const auto tx = apply_transmit_beamforming(sym, cfg.pulse, filters);
    const auto d = interference_decomposition(tx, spec, 0.0);
    const auto full = propagate(tx, spec, 0.0);
    CVec sum(full.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = d.principal[i] + d.interference[i] + d.noise[i];
    const double err = oracle::max_abs_diff(sum, full.samples()) / peak_abs(full.samples());
    note(o, fmt("3 paths, 24 elements: max |sum - propagate| / peak = %.1e", err));
    require(o, err < 1e-9, "reconstruction within 1e-9");
    return o;
}

ComplexBasebandSignal single_element_channel(const ComplexBasebandSignal& tx, std::vector<PathSpec> paths,
                                             double fc, double snr_db, std::uint64_t seed) {
    ChannelSpec spec;
    spec.geom = {1, 0.05, 1500.0};
    spec.fc = fc;
    spec.paths = std::move(paths);
    spec.snr_db = snr_db;
    spec.seed = seed;
    std::vector<ComplexBasebandSignal> v{tx};
    return propagate(v, spec, 0.0);
}

// 4. DFE on a static 3-path channel at 20 dB with the SPACE equalizer.
Outcome dfe_convergence() {
    Outcome o;
    const auto cfg = default_config(Profile::Space);
    const EqualizerConfig& eq = cfg.equalizer;
    const std::size_t Nt = static_cast<std::size_t>(eq.nt());
    const std::size_t n = 10000 + Nt;
    const CVec d = random_symbols(n + 40, Constellation::BPSK, 31);
    PathSpec p0, p1, p2;
    p1.gain = 0.5;
    p1.tau0 = 0.55e-3;
    p2.gain = 0.3;
    p2.tau0 = 1.9e-3;
    const auto rx = single_element_channel(pulse_shape(d, cfg.pulse), {p0, p1, p2}, cfg.fc, 20.0, 77);
    const auto r = dfe_run(rx, eq, d, n, 0.0);
    const CVec dd(d.begin(), d.begin() + static_cast<long>(n));
    const double mse = compute_frame_mse(dd, r.d_hat, Nt);
    const std::size_t errors = count_bit_errors(dd, r.d_tilde, Nt, Constellation::BPSK);
    note(o, fmt("Nf = %d, Nb = %d, lambda = %.3f, Kf1 = %.0e: MSE %.2f dB, %zu bit errors over %zu symbols", eq.Nf,
                eq.Nb, eq.lambda, eq.Kf1, mse, errors, n - Nt));
    require(o, mse <= -10.0, "MSE <= -10 dB");
    require(o, errors == 0, "zero bit errors");
    return o;
}

// 5. PLL output slope under a residual Doppler of 1e-5.
Outcome pll_slope() {
    Outcome o;
    const auto cfg = default_config(Profile::Space);
    const double a = 1e-5;
    const std::size_t n = 30000;
    const CVec d = random_symbols(n, Constellation::BPSK, 51);
    PathSpec p;
    p.drift.slope = a;
    const auto rx = single_element_channel(pulse_shape(d, cfg.pulse), {p}, cfg.fc, 30.0, 9);
    const auto r = dfe_run(rx, cfg.equalizer, d, n - 200, 0.0);
    RVec t, ph;
    for (std::size_t i = r.phi.size() / 2; i < r.phi.size(); ++i) {
        t.push_back(static_cast<double>(i) * cfg.symbol_period());
        ph.push_back(r.phi[i]);
    }
    const double want = -kTwoPi * cfg.fc * a / (1.0 - a);
    const double got = oracle::ls_slope(t, ph);
    const double rel = std::abs(got / want - 1.0);
    note(o, fmt("slope %.4f rad/s, expected %.4f rad/s, relative error %.2f%%", got, want, 100.0 * rel));
    require(o, rel < 0.05, "within 5%");
    return o;
}

// 6. Scalar RLS with lambda = 1 against batch LS; LMS hand recursion.
Outcome adaptation_oracles() {
    Outcome o;
    const double p0 = 1e8;
    AdaptiveFilter f(1, Algorithm::RLS, 1.0, 0.0, p0);
    const CVec u = oracle::random_cvec(100, 5);
    const CVec d = oracle::random_cvec(100, 6);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const CVec uk{u[k]};
        f.adapt(uk, d[k] - f.output(uk));
    }
    const cplx ls = oracle::batch_ls_scalar(u, d);
    const double err = std::abs(f.coefficients()[0] - ls) / std::max(1.0, std::abs(ls));
    note(o, fmt("RLS (P(0) = %.0e) vs batch LS after 100 samples: %.1e", p0, err));
    require(o, err < 1e-9, "RLS within 1e-9 of batch LS");

    AdaptiveFilter l(1, Algorithm::LMS, 1.0, 0.5, 1.0);
    const CVec one{cplx(1.0, 0.0)};
    const double want[] = {0.5, 0.75, 0.875};
    bool exact = true;
    for (double w : want) {
        l.adapt(one, cplx(1.0, 0.0) - l.output(one));
        exact = exact && l.coefficients()[0] == cplx(w, 0.0);
    }
    note(o, fmt("LMS mu = 0.5 on u = d = 1: c = %.3f after 3 steps", l.coefficients()[0].real()));
    require(o, exact, "LMS hand recursion 0.5, 0.75, 0.875 exactly");
    return o;
}

// 7. Frame MSE against the naive double loop; training symbols never count.
Outcome mse_oracle() {
    Outcome o;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> len(2, 400);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = len(rng);
        const std::size_t nt = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        const CVec d = oracle::random_cvec(n, 10 + static_cast<std::uint64_t>(i));
        const CVec dh = oracle::random_cvec(n, 5000 + static_cast<std::uint64_t>(i));
        mismatches += compute_frame_mse(d, dh, nt) != oracle::naive_frame_mse_db(d, dh, nt);
    }
    note(o, fmt("%d of 1000 random cases differ from the naive loop", mismatches));
    require(o, mismatches == 0, "bit-exact on 1000 cases");

    const auto cfg = default_config(Profile::Space);
    const std::size_t Nt = static_cast<std::size_t>(cfg.equalizer.nt());
    const CVec d = random_symbols(2 * Nt, Constellation::BPSK, 4);
    CVec dh(d);
    for (auto& x : dh) x *= 0.9;
    const double base = compute_frame_mse(d, dh, Nt);
    bool invariant = true;
    for (std::size_t k = 0; k < Nt; ++k) {
        CVec moved(dh);
        moved[k] = -5.0 * moved[k];
        invariant = invariant && compute_frame_mse(d, moved, Nt) == base;
    }
    note(o, fmt("Nt = 4 (Nf + Nb) = %zu; an error placed at any n < Nt leaves the MSE unchanged: %s", Nt,
                invariant ? "yes" : "no"));
    require(o, Nt == 160, "SPACE Nt = 160");
    require(o, invariant, "pre-Nt invariance");
    return o;
}

// 8. Probe -> principal angle -> beam: fraction of the ideal sqrt(M) amplitude.
Outcome angle_loop() {
    Outcome o;
    auto cfg = default_config(Profile::Space);
    cfg.beam.angle_source = AngleSource::Estimated;
    const double rootM = std::sqrt(static_cast<double>(cfg.array.M));
    double worst = 1e9;
    int bad = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(derive_seed(2024, s));
        ChannelSpec spec;
        spec.geom = cfg.array;
        spec.fc = cfg.fc;
        PathSpec p;
        p.tau0 = std::uniform_real_distribution<double>(2e-3, 20e-3)(rng);
        p.theta = std::uniform_real_distribution<double>(-50.0, 50.0)(rng) * kDeg;
        p.gain = 1.0;
        spec.paths = {p};
        spec.snr_db = 10.0;
        spec.seed = derive_seed(77, s);
        const double est = acquire_angle(cfg, spec);
        const auto g = steered_path_pulse(cfg.pulse, spec, 0, est);
        double peak = 0.0;
        for (const auto& x : g.samples()) peak = std::max(peak, std::abs(x));
        const double frac = peak / rootM;
        worst = std::min(worst, frac);
        bad += frac < std::pow(10.0, -0.5 / 20.0);
    }
    note(o, fmt("100 seeds, SNR 10 dB, 24 elements: worst %.2f%% of sqrt(M) (%.3f dB), %d below -0.5 dB",
                100.0 * worst, 20.0 * std::log10(worst), bad));
    require(o, bad == 0, ">= 95% of sqrt(M) (-0.5 dB) on every seed");
    return o;
}

// 9. Two-user scenario with and without null steering.
Outcome two_user() {
    Outcome o;
    auto cfg = default_config(Profile::Mace);
    const std::uint64_t seed = 17;
    const auto nulled = run_two_user(cfg, seed);
    cfg.two_user.null_steering = false;
    const auto plain = run_two_user(cfg, seed);
    for (int u = 0; u < 2; ++u) {
        const auto& n = nulled.users[u];
        const auto& p = plain.users[u];
        note(o, fmt("user %d: MSE %.2f dB (plain beams %.2f dB, gain %.2f dB), %zu bit errors, PLL slope %.2f rad/s",
                    u + 1, n.metrics.mse_db, p.metrics.mse_db, p.metrics.mse_db - n.metrics.mse_db,
                    n.metrics.bit_errors, n.phi_slope));
        require(o, n.metrics.mse_db <= -10.0, fmt("user %d MSE <= -10 dB", u + 1));
        require(o, n.metrics.bit_errors == 0, fmt("user %d zero bit errors", u + 1));
        require(o, p.metrics.mse_db - n.metrics.mse_db >= 6.0,
                fmt("user %d null steering improves MSE by >= 6 dB", u + 1));
    }
    require(o, nulled.users[0].phi_slope * nulled.users[1].phi_slope < 0.0, "opposite PLL slopes");
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 10. K = 100 SPACE run reproduced from its manifest; CDF shape; K = 1000 runtime.
Outcome monte_carlo(bool full) {
    Outcome o;
    auto cfg = default_config(Profile::Space);
    cfg.protocol.realizations = 100;
    cfg.protocol.seed = 20240601;
    const auto dir = fs::temp_directory_path() / "uwbeam_acceptance_mc";
    fs::remove_all(dir);
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = run_monte_carlo(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_results(a, cfg, (dir / "a").string(), {kVersion, "acceptance"});
    const auto again = config_from_manifest((dir / "a" / "manifest.json").string());
    const auto b = run_monte_carlo(again);
    emit_results(b, again, (dir / "b").string(), {kVersion, "acceptance"});
    const bool same = slurp(dir / "a" / "mse_cdf.csv") == slurp(dir / "b" / "mse_cdf.csv") &&
                      slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv");
    bool monotone = a.cdf.size() == 100;
    for (std::size_t i = 0; i < a.cdf.size(); ++i) {
        monotone = monotone && a.cdf[i].cdf == static_cast<double>(i + 1) / 100.0;
        if (i) monotone = monotone && a.cdf[i].mse_db >= a.cdf[i - 1].mse_db;
    }
    note(o, fmt("K = 100: median MSE %.2f dB, range [%.2f, %.2f] dB, BER %.2g, %zu failures, %.0f s",
                a.cdf[49].mse_db, a.cdf.front().mse_db, a.cdf.back().mse_db, a.ber, a.failures, secs));
    note(o, fmt("re-run from manifest byte-identical: %s", same ? "yes" : "no"));
    require(o, same, "bit-reproducible from the manifest");
    require(o, monotone, "CDF monotone from 1/K to 1");
    double k1000 = 10.0 * secs;
    if (full) {
        cfg.protocol.realizations = 1000;
        const auto t1 = std::chrono::steady_clock::now();
        const auto c = run_monte_carlo(cfg);
        k1000 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        note(o, fmt("K = 1000 measured: %.1f min, %zu failures", k1000 / 60.0, c.failures));
    } else {
        note(o, fmt("K = 1000 extrapolated from K = 100: %.1f min (run with --full to measure)", k1000 / 60.0));
    }
    require(o, k1000 < 30.0 * 60.0, "K = 1000 under 30 min");
    fs::remove_all(dir);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::vector<int> known;
    bool full = false;
    app.add_option("--only", only, "run only these criteria");
    app.add_option("--known-failure", known, "criteria whose failure does not change the exit status");
    app.add_flag("--full", full, "measure the K = 1000 Monte Carlo run instead of extrapolating");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "Beamformer contract", 1.0, beamformer_contract},
        {2, "Coherent-gain oracle", 5.0, coherent_gain},
        {3, "Interference-decomposition identity", 5.0, decomposition_identity},
        {4, "DFE convergence", 30.0, dfe_convergence},
        {5, "PLL slope identity", 30.0, pll_slope},
        {6, "Adaptation oracles", 0.0, adaptation_oracles},
        {7, "Frame MSE oracle", 0.0, mse_oracle},
        {8, "Angle-estimation loop", 60.0, angle_loop},
        {9, "Two-user scenario", 120.0, two_user},
        {10, "Monte Carlo determinism and shape", 0.0, [full] { return monte_carlo(full); }},
    };

    int failed = 0, unexpected = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            note(o, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0) require(o, secs < c.time_limit_s, fmt("runtime < %.0f s", c.time_limit_s));
        const bool is_known = std::find(known.begin(), known.end(), c.id) != known.end();
        std::printf("[%s] %2d. %s (%.1f s): %s\n", o.pass ? "PASS" : (is_known ? "FAIL, known" : "FAIL"), c.id,
                    c.name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) {
            ++failed;
            unexpected += !is_known;
        }
    }
    std::printf("%d of %d criteria passed\n", ran - failed, ran);
    return unexpected == 0 ? 0 : 1;
}
