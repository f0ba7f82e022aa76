#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/channel.hpp"
#include "uwbeam/error.hpp"
#include "uwbeam/mseq.hpp"

using namespace uwbeam;

namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kFs = 1e7 / 256.0;
constexpr double kTs = 1.0 / kFs;

PulseSpec space_pulse() { return {0.25, 6.0 / kFs, 16, 6}; }

ChannelSpec base_spec(int M = 24) {
    ChannelSpec s;
    s.geom = {M, 0.05, 1500.0};
    s.fc = 12500.0;
    return s;
}

PathSpec path(double gain, double tau0, double theta_deg) {
    PathSpec p;
    p.gain = gain;
    p.tau0 = tau0;
    p.theta = theta_deg * kDeg;
    return p;
}

struct Probe {
    CVec seq;
    ComplexBasebandSignal tx;
};

Probe make_probe(int degree, int periods = 4) {
    Probe p;
    p.seq = mseq_symbols(default_mseq_spec(degree));
    p.tx = probe_transmission(p.seq, space_pulse(), periods);
    return p;
}

ChannelEstimates probe_channel(const ChannelSpec& spec, const Probe& pr, int periods = 4) {
    const auto rx = propagate_uplink(pr.tx, spec, 0.0);
    ProbeConfig cfg;
    cfg.periods = periods;
    return estimate_element_channels(rx, pr.seq, space_pulse(), cfg);
}

std::size_t argmax_abs(const CVec& h) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < h.size(); ++i)
        if (std::abs(h[i]) > std::abs(h[k])) k = i;
    return k;
}

}  // namespace

TEST_CASE("periodic probe has an ideal-ish periodic autocorrelation") {
    const CVec seq = mseq_symbols(default_mseq_spec(7));
    const CVec rep = periodic_probe(seq, space_pulse());
    REQUIRE(rep.size() == 127u * 6u);
    // Circular shaping: symbol n peaks at sample n * Ns.
    for (std::size_t n = 0; n < seq.size(); n += 17) CHECK(std::abs(rep[n * 6] - seq[n]) < 0.1);
    CHECK_THROWS_AS(periodic_probe(CVec{}, space_pulse()), InvalidArgument);
    CHECK_THROWS_AS(probe_transmission(seq, space_pulse(), 0), InvalidArgument);
}

TEST_CASE("single path: peak at the path delay with the path gain") {
    const Probe pr = make_probe(9);
    for (double frac : {0.0, 0.3, 0.5}) {
        CAPTURE(frac);
        auto spec = base_spec(4);
        const double tau = (40.0 + frac) * kTs;
        spec.paths = {path(0.7, tau, 0.0)};
        const auto ch = probe_channel(spec, pr);
        REQUIRE(ch.elements() == 4);
        REQUIRE(ch.h.size() == 4u);
        for (const auto& per : ch.h) {
            const CVec& h = per[0];
            const std::size_t k = argmax_abs(h);
            CHECK(std::abs(static_cast<double>(k) - (40.0 + frac)) <= 1.0);
            // Band-limited fractional delays lower the on-grid sample; within 2% of |h| at these offsets.
            CHECK(std::abs(std::abs(h[k]) - 0.7) <= 0.02 * 0.7);
        }
    }
}

TEST_CASE("on-grid single path: carrier phase and gain recovered exactly") {
    const Probe pr = make_probe(8);
    auto spec = base_spec(3);
    spec.paths = {path(1.3, 25 * kTs, 20.0)};
    const auto ch = probe_channel(spec, pr, 2);
    const double dt = incremental_delay(spec.geom, 20.0 * kDeg);
    for (int m = 0; m < 3; ++m) {
        const cplx h = ch.h[0][static_cast<std::size_t>(m)][25];
        const cplx want = std::polar(1.0, -kTwoPi * spec.fc * (25 * kTs + m * dt));
        // A fractional sample offset scales the real pulse but leaves the phase alone.
        CHECK(std::abs(std::arg(h * std::conj(want))) < 1e-3);
        CHECK(std::abs(h) > 0.9 * 1.3 * 0.9);
    }
    CHECK(std::abs(ch.h[0][0][25] - 1.3 * std::polar(1.0, -kTwoPi * spec.fc * 25 * kTs)) < 2e-3);
}

TEST_CASE("two paths five symbols apart are resolved") {
    const Probe pr = make_probe(9);
    auto spec = base_spec(2);
    spec.paths = {path(1.0, 30 * kTs, 0.0), path(0.6, 60 * kTs, 0.0)};
    const auto ch = probe_channel(spec, pr, 1);
    const CVec& h = ch.h[0][0];
    CHECK(std::abs(std::abs(h[30]) - 1.0) < 0.02);
    CHECK(std::abs(std::abs(h[60]) - 0.6) < 0.02);
    // A clear dip between the two arrivals.
    CHECK(std::abs(h[45]) < 0.1);
}

TEST_CASE("zero channel gives zero estimates and a uniform map floor") {
    const Probe pr = make_probe(7);
    std::vector<ComplexBasebandSignal> rx;
    for (int m = 0; m < 4; ++m) rx.emplace_back(CVec(pr.tx.size(), cplx{}), kFs, 0.0);
    const auto ch = estimate_element_channels(rx, pr.seq, space_pulse());
    for (const auto& per : ch.h)
        for (const auto& h : per)
            for (const auto& x : h) CHECK(std::abs(x) == 0.0);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 1 * kDeg);
    const auto map = delay_angle_map(ch, {4, 0.05, 1500.0}, 12500.0, grid);
    for (double p : map.power_db) CHECK(p == -300.0);
}

TEST_CASE("probe shorter than the delay spread warns; truncated reception throws") {
    const Probe pr = make_probe(7);
    auto spec = base_spec(2);
    spec.paths = {path(1.0, 10 * kTs, 0.0)};
    const auto rx = propagate_uplink(pr.tx, spec, 0.0);
    ProbeConfig cfg;
    cfg.expected_delay_spread = 1.0;
    const auto ch = estimate_element_channels(rx, pr.seq, space_pulse(), cfg);
    CHECK(ch.warnings.size() == 1u);
    cfg.expected_delay_spread = 1e-3;
    CHECK(estimate_element_channels(rx, pr.seq, space_pulse(), cfg).warnings.empty());
    cfg.periods = 10;
    CHECK_THROWS_AS(estimate_element_channels(rx, pr.seq, space_pulse(), cfg), TruncatedFrame);
    CHECK_THROWS_AS(estimate_element_channels({}, pr.seq, space_pulse()), InvalidArgument);
}

TEST_CASE("map of a single path peaks at the path delay and angle") {
    const Probe pr = make_probe(9);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg);
    for (double theta : {-23.0, 0.0, 8.5, 41.25}) {
        CAPTURE(theta);
        auto spec = base_spec();
        spec.paths = {path(1.0, 0.0123, theta)};
        const auto ch = probe_channel(spec, pr);
        const auto map = delay_angle_map(ch, spec.geom, spec.fc, grid);
        REQUIRE(map.power_db.size() == map.delay_axis.size() * map.angle_axis.size());
        std::size_t best = 0;
        int zeros = 0;
        for (std::size_t i = 0; i < map.power_db.size(); ++i) {
            CHECK(std::isfinite(map.power_db[i]));
            CHECK(map.power_db[i] <= 0.0);
            if (map.power_db[i] > map.power_db[best]) best = i;
            if (map.power_db[i] == 0.0) ++zeros;
        }
        CHECK(zeros == 1);
        const std::size_t A = map.angle_axis.size();
        const double t_peak = map.delay_axis[best / A];
        CHECK(std::abs(t_peak - std::fmod(0.0123, pr.seq.size() * 6 * kTs)) <= kTs + 1e-12);
        CHECK(std::abs(principal_angle(map) - theta * kDeg) <= 0.25 * kDeg + 1e-12);
        for (std::size_t i = 1; i < map.delay_axis.size(); ++i) CHECK(map.delay_axis[i] > map.delay_axis[i - 1]);
    }
}

TEST_CASE("broadside path gives a map symmetric in angle") {
    const Probe pr = make_probe(8);
    auto spec = base_spec(8);
    spec.paths = {path(1.0, 20 * kTs, 0.0)};
    const auto ch = probe_channel(spec, pr, 1);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg);
    const auto map = delay_angle_map(ch, spec.geom, spec.fc, grid);
    const std::size_t A = grid.size();
    const std::size_t D = map.delay_axis.size();
    std::size_t d0 = 0;
    for (std::size_t d = 0; d < D; ++d)
        if (std::abs(map.delay_axis[d] - 20 * kTs) < 0.5 * kTs) d0 = d;
    REQUIRE(d0 > 0);
    // Mirror symmetry along the arrival row; point symmetry about (tau0, 0) elsewhere.
    double worst_row = 0.0, worst_point = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
        worst_row = std::max(worst_row, std::abs(map.at(d0, a) - map.at(d0, A - 1 - a)));
        for (std::size_t k = 1; k <= 30 && k <= d0 && d0 + k < D; ++k) {
            const double p = map.at(d0 + k, a), q = map.at(d0 - k, A - 1 - a);
            if (p > -60.0 || q > -60.0) worst_point = std::max(worst_point, std::abs(p - q));
        }
    }
    CHECK(worst_row < 1e-2);
    CHECK(worst_point < 0.1);
}

TEST_CASE("two paths 10 dB apart: principal angle is the stronger one") {
    const Probe pr = make_probe(9);
    auto spec = base_spec();
    spec.paths = {path(std::pow(10.0, -0.5), 0.004, -30.0), path(1.0, 0.009, 12.0)};
    const auto ch = probe_channel(spec, pr);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg);
    CHECK(std::abs(principal_angle(delay_angle_map(ch, spec.geom, spec.fc, grid)) - 12.0 * kDeg) <= 0.25 * kDeg);
    // Swap strengths.
    spec.paths[0].gain = 1.0;
    spec.paths[1].gain = std::pow(10.0, -0.5);
    const auto ch2 = probe_channel(spec, pr);
    CHECK(std::abs(principal_angle(delay_angle_map(ch2, spec.geom, spec.fc, grid)) + 30.0 * kDeg) <= 0.25 * kDeg);
}

TEST_CASE("principal_angle tie-breaking") {
    DelayAngleMap map;
    map.delay_axis = {0.0, 1.0};
    map.angle_axis = {-0.2, -0.1, 0.1, 0.2};
    map.power_db = {-5, 0, 0, -5, -3, -3, -3, -3};
    // Equal |theta| at +-0.1: first in scan order wins.
    CHECK(principal_angle(map) == doctest::Approx(-0.1));
    map.power_db = {0, -1, -1, -1, -1, -1, 0, -1};
    CHECK(principal_angle(map) == doctest::Approx(0.1));
    map.power_db.clear();
    CHECK_THROWS_AS(principal_angle(map), InvalidArgument);
}

TEST_CASE("delay_angle_map input checks") {
    const Probe pr = make_probe(7);
    auto spec = base_spec(4);
    spec.paths = {path(1.0, 10 * kTs, 0.0)};
    const auto ch = probe_channel(spec, pr, 1);
    const RVec grid = angle_grid(-10 * kDeg, 10 * kDeg, 1 * kDeg);
    CHECK_THROWS_AS(delay_angle_map(ch, {5, 0.05, 1500.0}, 12500.0, grid), InvalidArgument);
    CHECK_THROWS_AS(delay_angle_map(ch, spec.geom, 12500.0, RVec{}), InvalidArgument);
    CHECK_THROWS_AS(delay_angle_map(ch, spec.geom, 12500.0, RVec{0.1, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(angle_grid(0.0, 1.0, 0.0), InvalidArgument);
    CHECK(angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg).size() == 481u);
}

TEST_CASE("angle estimate within one cell over 100 seeded trials at 10 dB SNR") {
    const Probe pr = make_probe(7);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg);
    MapWindow win;
    win.length = 2e-3;
    win.before = 0.5e-3;
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
        const double theta = -40.0 + 0.8 * t + 0.1;
        auto spec = base_spec();
        spec.paths = {path(1.0, 50 * kTs, theta)};
        spec.snr_db = 10.0;
        spec.seed = 1000 + static_cast<std::uint64_t>(t);
        const auto ch = probe_channel(spec, pr);
        const double est = principal_angle(delay_angle_map(ch, spec.geom, spec.fc, grid, win));
        if (std::abs(est - theta * kDeg) > 0.25 * kDeg + 1e-12) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("consistency loop: beam toward the estimate reaches the ideal array gain") {
    const Probe pr = make_probe(9);
    const RVec grid = angle_grid(-60 * kDeg, 60 * kDeg, 0.25 * kDeg);
    const int M = 24;
    for (double theta : {-17.13, 5.07, 33.61}) {
        CAPTURE(theta);
        auto spec = base_spec(M);
        spec.paths = {path(1.0, 0.006, theta), path(0.5, 0.011, theta - 25.0)};
        const auto ch = probe_channel(spec, pr);
        const double est = principal_angle(delay_angle_map(ch, spec.geom, spec.fc, grid));
        const auto g = steered_path_pulse(space_pulse(), spec, 0, est);
        double peak = 0.0;
        for (const auto& x : g.samples()) peak = std::max(peak, std::abs(x));
        const double loss_db = 20.0 * std::log10(std::sqrt(static_cast<double>(M)) / peak);
        CHECK(loss_db < 0.5);
        CHECK(loss_db > -0.01);
    }
}

TEST_CASE("map CSV export") {
    DelayAngleMap map;
    map.delay_axis = {0.0, 1e-3};
    map.angle_axis = {-kPi / 6, kPi / 6};
    map.power_db = {0.0, -3.0, -6.0, -9.0};
    const std::string path = "test_angle_map.csv";
    write_map_csv(path, map);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line == "delay_s,angle_deg,power_db");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    CHECK(rows == 4);
    std::remove(path.c_str());
    CHECK_THROWS_AS(write_map_csv("/nonexistent_dir/x.csv", map), IoError);
}
