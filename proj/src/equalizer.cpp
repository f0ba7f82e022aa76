#include <cmath>
#include <fstream>
#include <iomanip>

#include "uwbeam/error.hpp"
#include "uwbeam/interp.hpp"
#include "uwbeam/receiver.hpp"

namespace uwbeam {

void EqualizerConfig::validate() const {
    if (Nf < 2) throw InvalidArgument("equalizer: Nf must be >= 2");
    if (Nb < 0) throw InvalidArgument("equalizer: Nb must be >= 0");
    if (n1() < 1 || n1() > Nf) throw InvalidArgument("equalizer: N1 must be in [1, Nf]");
    if (algorithm == Algorithm::RLS && !(lambda > 0.0 && lambda <= 1.0))
        throw InvalidArgument("equalizer: lambda must be in (0, 1]");
    if (algorithm == Algorithm::LMS && !(mu > 0.0)) throw InvalidArgument("equalizer: mu must be positive");
    if (!(Kf1 >= 0.0) || !(kf2() >= 0.0)) throw InvalidArgument("equalizer: PLL constants must be >= 0");
    if (nt() < 0) throw InvalidArgument("equalizer: Nt must be >= 0");
    if (!(rls_init > 0.0)) throw InvalidArgument("equalizer: rls_init must be positive");
    if (!(fc > 0.0)) throw InvalidArgument("equalizer: fc must be positive");
    if (!(symbol_period > 0.0)) throw InvalidArgument("equalizer: symbol period must be positive");
    if (!std::isfinite(phi_init) || !std::isfinite(integrator_init))
        throw InvalidArgument("equalizer: PLL initial state must be finite");
    if (divergence_run < 1) throw InvalidArgument("equalizer: divergence_run must be >= 1");
}

AdaptiveFilter::AdaptiveFilter(std::size_t n, Algorithm algorithm, double lambda, double mu, double rls_init)
    : algorithm_(algorithm), lambda_(lambda), mu_(mu), rls_init_(rls_init), c_(n, cplx{}) {
    if (n == 0) throw InvalidArgument("adaptive filter needs at least one coefficient");
    if (algorithm_ == Algorithm::RLS) {
        Pu_.assign(n, cplx{});
        reset_inverse();
    }
}

void AdaptiveFilter::reset_inverse() {
    const std::size_t n = c_.size();
    P_.assign(n * n, cplx{});
    for (std::size_t i = 0; i < n; ++i) P_[i * n + i] = rls_init_;
}

cplx AdaptiveFilter::output(std::span<const cplx> u) const {
    if (u.size() != c_.size()) throw InvalidArgument("adaptive filter: input length mismatch");
    cplx acc{};
    for (std::size_t i = 0; i < u.size(); ++i) acc += std::conj(c_[i]) * u[i];
    return acc;
}

bool AdaptiveFilter::adapt(std::span<const cplx> u, cplx e) {
    const std::size_t n = c_.size();
    if (u.size() != n) throw InvalidArgument("adaptive filter: input length mismatch");
    const cplx ec = std::conj(e);
    if (algorithm_ == Algorithm::LMS) {
        for (std::size_t i = 0; i < n; ++i) c_[i] += mu_ * u[i] * ec;
        return true;
    }
    double denom = lambda_;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx* row = &P_[i * n];
        cplx acc{};
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * u[j];
        Pu_[i] = acc;
        denom += (std::conj(u[i]) * acc).real();
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        reset_inverse();
        return false;
    }
    const double inv = 1.0 / denom;
    for (std::size_t i = 0; i < n; ++i) c_[i] += Pu_[i] * inv * ec;
    const double il = 1.0 / lambda_;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx ki = Pu_[i] * inv;
        cplx* row = &P_[i * n];
        for (std::size_t j = 0; j < n; ++j) row[j] = (row[j] - ki * std::conj(Pu_[j])) * il;
    }
    // Keep P Hermitian; rounding otherwise accumulates into a non-symmetric P over long frames.
    for (std::size_t i = 0; i < n; ++i) {
        P_[i * n + i] = P_[i * n + i].real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx m = 0.5 * (P_[i * n + j] + std::conj(P_[j * n + i]));
            P_[i * n + j] = m;
            P_[j * n + i] = std::conj(m);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double d = P_[i * n + i].real();
        if (!(d > 0.0) || !std::isfinite(d)) {
            reset_inverse();
            return false;
        }
    }
    return true;
}

double PhaseTracker::update(cplx d_hat, cplx ref) {
    const double mag = std::abs(d_hat) * std::abs(ref);
    const double err = mag > 0.0 ? (d_hat * std::conj(ref)).imag() / mag : 0.0;
    integrator += err;
    phi += kf1 * err + kf2 * integrator;
    return err;
}

DfeResult dfe_run(const ComplexBasebandSignal& v, const EqualizerConfig& cfg, std::span<const cplx> training,
                  std::size_t payload_len, double t_first) {
    cfg.validate();
    const auto Nt = static_cast<std::size_t>(cfg.nt());
    if (training.size() < std::min(Nt, payload_len))
        throw InvalidArgument("dfe_run: training sequence shorter than Nt");
    const auto Nf = static_cast<std::size_t>(cfg.Nf);
    const auto Nb = static_cast<std::size_t>(cfg.Nb);
    const int N1 = cfg.n1();
    const double T = cfg.symbol_period;
    const double t_end = v.t0() + static_cast<double>(v.size() - 1) * v.sample_period();

    auto sample = [&](double t) -> cplx {
        if (t < v.t0()) return cplx{};
        if (t > t_end) throw TruncatedFrame("dfe_run: signal ends at " + std::to_string(t_end) + " s, need sample at " +
                                            std::to_string(t) + " s");
        return linear_interpolate(v, t);
    };

    AdaptiveFilter filt(Nf + Nb, cfg.algorithm, cfg.lambda, cfg.mu, cfg.rls_init);
    filt.coefficients()[static_cast<std::size_t>(N1)] = 1.0;
    PhaseTracker pll{cfg.Kf1, cfg.kf2(), cfg.phi_init, cfg.integrator_init};

    CVec y(Nf, cplx{});
    CVec fb(Nb, cplx{});
    CVec u(Nf + Nb);
    {
        // Register contents as left by a symbol -1, so symbol 0 shifts into a full window.
        const double shift = pll.phi / (kTwoPi * cfg.fc);
        for (std::size_t j = 0; j < Nf; ++j)
            y[j] = sample(t_first - T + (N1 - static_cast<double>(j)) * T / 2.0 - shift);
    }

    DfeResult r;
    r.d_hat.reserve(payload_len);
    r.d_tilde.reserve(payload_len);
    r.e.reserve(payload_len);
    r.phi.reserve(payload_len);
    int run = 0;
    for (std::size_t n = 0; n < payload_len; ++n) {
        const double base = t_first + static_cast<double>(n) * T - pll.phi / (kTwoPi * cfg.fc);
        const cplx s_new = sample(base + N1 * T / 2.0);
        const cplx s_old = sample(base + (N1 - 1) * T / 2.0);
        for (std::size_t j = Nf - 1; j >= 2; --j) y[j] = y[j - 2];
        y[0] = s_new;
        y[1] = s_old;

        const cplx rot = std::polar(1.0, -pll.phi);
        for (std::size_t j = 0; j < Nf; ++j) u[j] = y[j] * rot;
        for (std::size_t j = 0; j < Nb; ++j) u[Nf + j] = fb[j];

        const cplx d_hat = filt.output(u);
        if (!std::isfinite(d_hat.real()) || !std::isfinite(d_hat.imag()))
            throw Divergence("dfe_run: non-finite output at symbol " + std::to_string(n));
        const cplx d_tilde = decision(d_hat, cfg.constellation);
        const cplx ref = n < Nt ? training[n] : d_tilde;
        const cplx e = ref - d_hat;
        if (!filt.adapt(u, e)) ++r.rls_resets;
        pll.update(d_hat, ref);
        if (!std::isfinite(pll.phi)) throw Divergence("dfe_run: phase tracker diverged at symbol " + std::to_string(n));

        if (Nb > 0) {
            for (std::size_t j = Nb - 1; j >= 1; --j) fb[j] = fb[j - 1];
            fb[0] = ref;
        }
        run = std::abs(e) > cfg.divergence_threshold ? run + 1 : 0;
        if (run >= cfg.divergence_run)
            throw Divergence("dfe_run: |e| above " + std::to_string(cfg.divergence_threshold) + " for " +
                             std::to_string(run) + " symbols at symbol " + std::to_string(n));

        r.d_hat.push_back(d_hat);
        r.d_tilde.push_back(d_tilde);
        r.e.push_back(e);
        r.phi.push_back(pll.phi);
        if (cfg.record_inputs) r.inputs.push_back(y);
    }
    return r;
}

void write_trace_csv(const std::string& path, const DfeResult& r) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "n,d_hat_re,d_hat_im,d_tilde_re,d_tilde_im,e_abs,phi_hat\n";
    f << std::setprecision(10);
    for (std::size_t n = 0; n < r.d_hat.size(); ++n)
        f << n << ',' << r.d_hat[n].real() << ',' << r.d_hat[n].imag() << ',' << r.d_tilde[n].real() << ','
          << r.d_tilde[n].imag() << ',' << std::abs(r.e[n]) << ',' << r.phi[n] << '\n';
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace uwbeam
