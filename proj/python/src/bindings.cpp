#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <string>

#include "uwbeam/angle_estimator.hpp"
#include "uwbeam/beamformer.hpp"
#include "uwbeam/error.hpp"
#include "uwbeam/harness/config.hpp"
#include "uwbeam/harness/experiment.hpp"
#include "uwbeam/mseq.hpp"
#include "uwbeam/version.hpp"

namespace py = pybind11;
using namespace uwbeam;

namespace {

constexpr double kDeg = kPi / 180.0;

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

CVec to_cvec(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw InvalidArgument("expected a 1-D array");
    return CVec(a.data(), a.data() + a.size());
}

py::dict metrics_dict(const FrameMetrics& m) {
    py::dict d;
    d["mse_db"] = m.mse_db;
    d["bit_errors"] = m.bit_errors;
    d["bits"] = m.bits;
    d["symbols"] = m.symbols;
    d["converged"] = m.converged;
    d["failure"] = m.failure;
    return d;
}

py::dict trace_dict(const FrameTrace& t) {
    py::dict d;
    d["payload"] = to_array(t.payload);
    d["d_hat"] = to_array(t.dfe.d_hat);
    d["d_tilde"] = to_array(t.dfe.d_tilde);
    d["phi"] = to_array(t.dfe.phi);
    d["coarse_doppler"] = t.sync.coarse_doppler;
    d["peak_quality_db"] = t.sync.peak_quality;
    d["t_first"] = t.t_first;
    return d;
}

}  // namespace

PYBIND11_MODULE(_uwbeam, m) {
    m.doc() = "Angle-based transmit beamforming simulator for underwater acoustic downlinks";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "UwbeamError", PyExc_RuntimeError);
    // Argument errors surface as ValueError, every other library error as UwbeamError.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidArgument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("default_config_json", [](const std::string& profile) {
        return config_to_json_text(default_config(profile_from_string(profile)));
    }, py::arg("profile") = "space", "Resolved default config of a profile as JSON text.");

    m.def("resolve_config_json", [](const std::string& text) {
        return config_to_json_text(config_from_json_text(text));
    }, py::arg("config_json"), "Parses, validates and re-serializes a config.");

    m.def("compute_frame_mse", [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& d,
                                  const py::array_t<cplx, py::array::c_style | py::array::forcecast>& d_hat,
                                  std::size_t nt) { return compute_frame_mse(to_cvec(d), to_cvec(d_hat), nt); },
          py::arg("d"), py::arg("d_hat"), py::arg("nt"), "Frame MSE over n >= nt in dB, floored at -60 dB.");

    m.def("mseq_symbols", [](int degree) { return to_array(mseq_symbols(default_mseq_spec(degree))); },
          py::arg("degree"), "Antipodal m-sequence of the given register degree.");

    m.def("beam_weights", [](const std::string& config_json, double angle_deg, std::vector<double> nulls_deg) {
        const auto cfg = config_from_json_text(config_json);
        std::vector<double> nulls;
        for (double d : nulls_deg) nulls.push_back(d * kDeg);
        const BeamWeights w = nulls.empty() ? design_single_beam(cfg.array, angle_deg * kDeg, bin_grid(cfg))
                                            : design_null_steering(cfg.array, angle_deg * kDeg, nulls, bin_grid(cfg));
        py::array_t<cplx> out({static_cast<py::ssize_t>(w.bins()), static_cast<py::ssize_t>(w.elements())});
        auto r = out.mutable_unchecked<2>();
        for (std::size_t l = 0; l < w.bins(); ++l)
            for (int e = 0; e < w.elements(); ++e) r(static_cast<py::ssize_t>(l), e) = w(l, e);
        RVec freqs(w.bins());
        for (std::size_t l = 0; l < w.bins(); ++l) freqs[l] = w.grid().bin_frequency(l);
        return py::make_tuple(out, to_array(freqs));
    }, py::arg("config_json"), py::arg("angle_deg"), py::arg("nulls_deg") = std::vector<double>{},
       "Per-bin weights (L x M) and bin passband frequencies.");

    m.def("beam_pattern", [](const std::string& config_json, double angle_deg, std::vector<double> nulls_deg,
                             std::vector<double> angles_deg, double freq_hz) {
        const auto cfg = config_from_json_text(config_json);
        std::vector<double> nulls, angles;
        for (double d : nulls_deg) nulls.push_back(d * kDeg);
        for (double d : angles_deg) angles.push_back(d * kDeg);
        const BeamWeights w = nulls.empty() ? design_single_beam(cfg.array, angle_deg * kDeg, bin_grid(cfg))
                                            : design_null_steering(cfg.array, angle_deg * kDeg, nulls, bin_grid(cfg));
        return to_array(beam_pattern(w, cfg.array, angles, freq_hz));
    }, py::arg("config_json"), py::arg("angle_deg"), py::arg("nulls_deg"), py::arg("angles_deg"), py::arg("freq_hz"),
       "|array response| over angles at the occupied bin nearest freq_hz.");

    m.def("angle_map", [](const std::string& config_json, std::optional<std::uint64_t> seed, bool randomize) {
        const auto cfg = config_from_json_text(config_json);
        const auto spec = build_channel(cfg, seed.value_or(cfg.protocol.seed), randomize);
        DelayAngleMap map;
        {
            py::gil_scoped_release release;
            map = probe_angle_map(cfg, spec);
        }
        py::array_t<double> p({static_cast<py::ssize_t>(map.delay_axis.size()),
                               static_cast<py::ssize_t>(map.angle_axis.size())});
        std::copy(map.power_db.begin(), map.power_db.end(), p.mutable_data());
        RVec deg(map.angle_axis);
        for (auto& a : deg) a /= kDeg;
        py::dict d;
        d["delay_s"] = to_array(map.delay_axis);
        d["angle_deg"] = to_array(deg);
        d["power_db"] = p;
        d["principal_angle_deg"] = principal_angle(map) / kDeg;
        return d;
    }, py::arg("config_json"), py::arg("seed") = py::none(), py::arg("randomize") = false);

    m.def("run_single_link", [](const std::string& config_json, std::optional<std::uint64_t> seed, bool randomize) {
        const auto cfg = config_from_json_text(config_json);
        LinkResult r;
        {
            py::gil_scoped_release release;
            r = run_single_link(cfg, seed.value_or(cfg.protocol.seed), randomize);
        }
        py::list frames, traces;
        for (const auto& f : r.frames) frames.append(metrics_dict(f));
        for (const auto& t : r.traces) traces.append(trace_dict(t));
        py::dict d;
        d["theta_hat_deg"] = r.theta_hat / kDeg;
        d["frames"] = frames;
        d["traces"] = traces;
        return d;
    }, py::arg("config_json"), py::arg("seed") = py::none(), py::arg("randomize") = false);

    m.def("run_monte_carlo", [](const std::string& config_json) {
        const auto cfg = config_from_json_text(config_json);
        MonteCarloResult r;
        {
            py::gil_scoped_release release;
            r = run_monte_carlo(cfg);
        }
        RVec mse, cdf_x, cdf_y;
        py::list realizations;
        for (const auto& frames : r.realizations) {
            py::list l;
            for (const auto& f : frames) l.append(metrics_dict(f));
            realizations.append(l);
        }
        for (const auto& c : r.cdf) {
            cdf_x.push_back(c.mse_db);
            cdf_y.push_back(c.cdf);
        }
        py::dict d;
        d["master_seed"] = r.master_seed;
        d["realizations"] = realizations;
        d["cdf_mse_db"] = to_array(cdf_x);
        d["cdf"] = to_array(cdf_y);
        d["ber"] = r.ber;
        d["failures"] = r.failures;
        return d;
    }, py::arg("config_json"));

    m.def("run_two_user", [](const std::string& config_json, std::optional<std::uint64_t> seed) {
        const auto cfg = config_from_json_text(config_json);
        TwoUserResult r;
        {
            py::gil_scoped_release release;
            r = run_two_user(cfg, seed.value_or(cfg.protocol.seed));
        }
        py::list users;
        for (const auto& u : r.users) {
            py::dict d = metrics_dict(u.metrics);
            d["phi_slope"] = u.phi_slope;
            d["trace"] = trace_dict(u.trace);
            users.append(d);
        }
        return users;
    }, py::arg("config_json"), py::arg("seed") = py::none());
}
