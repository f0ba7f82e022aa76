#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbeam/pulse.hpp"
#include "uwbeam/signal.hpp"

namespace uwbeam {

enum class Constellation { BPSK, QPSK };

/// Nearest constellation point. BPSK points are +-1, QPSK points (+-1 +-j)/sqrt(2).
/// Ties (a zero coordinate) resolve toward the positive side.
cplx decision(cplx d_hat, Constellation c);

int bits_per_symbol(Constellation c);

/// Gray labels: BPSK bit = [re < 0]; QPSK bits = [re < 0], [im < 0].
unsigned symbol_bits(cplx point, Constellation c);

/// Random unit-energy symbols drawn uniformly from the constellation.
CVec random_symbols(std::size_t n, Constellation c, std::uint64_t seed);

struct SyncConfig {
    double a_max = 1.5e-3;       // Doppler search half range
    double a_step = 2.5e-5;      // final Doppler grid step
    double coarse_step = 1e-4;   // first-pass grid step (FFT correlation)
    bool search_doppler = true;
    std::optional<double> known_doppler;  // oracle mode: skip the search
    std::size_t max_offset = 0;           // largest frame_start considered; 0 = whole signal
    double min_peak_quality_db = 3.0;
};

struct SyncResult {
    std::size_t frame_start = 0;  // v index aligned with the first sample of pulse_shape(preamble)
    double fine_offset = 0.0;     // parabolic sub-sample refinement, samples, in (-0.5, 0.5)
    double coarse_doppler = 0.0;  // a_hat
    double peak_quality = 0.0;    // peak-to-sidelobe power ratio, dB
    cplx gain{1.0, 0.0};          // correlation peak / replica energy
};

/// Correlates v against the pulse-shaped preamble replica, compressed by each
/// candidate a_hat (time scale (1 - a_hat), carrier offset -fc a_hat). Sidelobes
/// are measured outside +-2 symbols of the peak.
/// Throws SyncFailure when the peak quality falls below cfg.min_peak_quality_db.
SyncResult synchronize(const ComplexBasebandSignal& v, std::span<const cplx> preamble, const PulseSpec& pulse,
                       double fc, const SyncConfig& cfg = {});

/// v(t / (1 - a_hat)) by band-limited interpolation, with the carrier rotation
/// of the compression removed as well (fc = 0 leaves the phase alone).
ComplexBasebandSignal coarse_resample(const ComplexBasebandSignal& v, double a_hat, double fc);

/// Ideal low-pass to the occupied band (1 + alpha) / (2T), scaled by `margin`.
ComplexBasebandSignal front_end_filter(const ComplexBasebandSignal& v, const PulseSpec& pulse, double margin = 1.1);

enum class Algorithm { RLS, LMS };

struct EqualizerConfig {
    int Nf = 20;
    int Nb = 20;
    int N1 = -1;  // -1: Nf / 2
    Algorithm algorithm = Algorithm::RLS;
    double lambda = 0.995;
    double mu = 0.01;
    double Kf1 = 1e-4;
    double Kf2 = -1.0;  // negative: Kf1 / 10
    Constellation constellation = Constellation::BPSK;
    int Nt = -1;  // -1: 4 (Nf + Nb)
    double rls_init = 100.0;
    double fc = 12500.0;
    double symbol_period = 1.0;
    double phi_init = 0.0;
    double integrator_init = 0.0;
    double divergence_threshold = 10.0;
    int divergence_run = 50;
    bool record_inputs = false;

    int n1() const { return N1 < 0 ? Nf / 2 : N1; }
    double kf2() const { return Kf2 < 0.0 ? Kf1 / 10.0 : Kf2; }
    int nt() const { return Nt < 0 ? 4 * (Nf + Nb) : Nt; }
    void validate() const;
};

/// Joint coefficient vector c = [a; -b] with the optional RLS inverse correlation.
class AdaptiveFilter {
public:
    AdaptiveFilter(std::size_t n, Algorithm algorithm, double lambda, double mu, double rls_init);

    /// c^H u
    cplx output(std::span<const cplx> u) const;
    /// LMS: c += mu u e^*. RLS: k = P u / (lambda + u^H P u); c += k e^*; P = (P - k u^H P) / lambda.
    /// Returns false (after resetting P) when the RLS recursion lost positive definiteness.
    bool adapt(std::span<const cplx> u, cplx e);

    std::span<const cplx> coefficients() const { return c_; }
    std::span<cplx> coefficients() { return c_; }
    std::size_t size() const { return c_.size(); }

private:
    Algorithm algorithm_;
    double lambda_;
    double mu_;
    double rls_init_;
    CVec c_;
    CVec P_;  // n x n, row-major, Hermitian
    CVec Pu_;
    void reset_inverse();
};

/// Second-order decision-directed phase tracker.
struct PhaseTracker {
    double kf1 = 1e-4;
    double kf2 = 1e-5;
    double phi = 0.0;
    double integrator = 0.0;

    /// err = Im{d_hat conj(ref)} / (|d_hat| |ref|); integrator += err; phi += kf1 err + kf2 integrator.
    double update(cplx d_hat, cplx ref);
};

struct DfeResult {
    CVec d_hat;
    CVec d_tilde;
    CVec e;
    RVec phi;
    std::size_t rls_resets = 0;
    std::vector<CVec> inputs;  // y per symbol when record_inputs is set
};

/// Fractionally spaced DFE with PLL-driven resampling. Symbol n is taken at
/// t_first + nT; its two new samples sit at t_first + nT + i T/2 - phi/(2 pi fc)
/// for i = N1, N1 - 1 (phi from the previous symbol). The first Nt symbols use
/// `training` as reference and as feedback; later ones are decision directed.
/// Throws TruncatedFrame when v ends before the last symbol's samples and
/// Divergence on non-finite state or a run of large errors.
DfeResult dfe_run(const ComplexBasebandSignal& v, const EqualizerConfig& cfg, std::span<const cplx> training,
                  std::size_t payload_len, double t_first);

/// n, d_hat_re, d_hat_im, d_tilde_re, d_tilde_im, e_abs, phi_hat
void write_trace_csv(const std::string& path, const DfeResult& r);

}  // namespace uwbeam
