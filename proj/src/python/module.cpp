#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ghztp/net.hpp"
#include "ghztp/verify.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace ghztp;

namespace {

std::vector<qsim::Complex> amplitudes(const qsim::StateVector& s) {
  return {s.amplitudes().begin(), s.amplitudes().end()};
}

// Row-major nested lists.
std::vector<std::vector<qsim::Complex>> rows(const qsim::DensityMatrix& rho) {
  std::vector<std::vector<qsim::Complex>> out(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    out[i].assign(rho.entries().begin() + i * rho.dim(), rho.entries().begin() + (i + 1) * rho.dim());
  }
  return out;
}

protocol::ProtocolResult run(const protocol::SignalState& signal, std::uint64_t seed,
                             std::optional<qsim::BellOutcome> bell,
                             std::optional<qsim::CharlieOutcome> charlie) {
  if (bell.has_value() != charlie.has_value()) throw ValidationError("bell and charlie go together");
  if (bell) return protocol::run_protocol(signal, protocol::ForcedPolicy{*bell, *charlie});
  return protocol::run_protocol(signal, protocol::SeededPolicy{seed});
}

}  // namespace

PYBIND11_MODULE(_ghztp, m) {
  m.doc() = "Controlled teleportation over a GHZ state";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ImpossibleOutcomeError>(m, "ImpossibleOutcomeError", PyExc_RuntimeError);
  py::register_exception<ProtocolOrderError>(m, "ProtocolOrderError", PyExc_RuntimeError);
  py::register_exception<net::ConnectionError>(m, "ConnectionError", PyExc_ConnectionError);

  py::enum_<qsim::BellOutcome>(m, "BellOutcome")
      .value("PhiPlus", qsim::BellOutcome::PhiPlus)
      .value("PhiMinus", qsim::BellOutcome::PhiMinus)
      .value("PsiPlus", qsim::BellOutcome::PsiPlus)
      .value("PsiMinus", qsim::BellOutcome::PsiMinus);
  py::enum_<qsim::CharlieOutcome>(m, "CharlieOutcome")
      .value("Plus", qsim::CharlieOutcome::Plus)
      .value("Minus", qsim::CharlieOutcome::Minus);

  py::class_<protocol::SignalState>(m, "SignalState")
      .def(py::init<qsim::Complex, qsim::Complex>(), "alpha"_a, "beta"_a)
      .def_static(
          "random", [](std::uint64_t seed) {
            qsim::Rng rng(seed);
            return protocol::SignalState::random(rng);
          },
          "seed"_a)
      .def_property_readonly("alpha", &protocol::SignalState::alpha)
      .def_property_readonly("beta", &protocol::SignalState::beta)
      .def("__repr__", [](const protocol::SignalState& s) {
        return "SignalState(" + py::repr(py::cast(s.alpha())).cast<std::string>() + ", " +
               py::repr(py::cast(s.beta())).cast<std::string>() + ")";
      });

  py::class_<protocol::ProtocolResult>(m, "ProtocolResult")
      .def_property_readonly("trace",
                             [](const protocol::ProtocolResult& r) {
                               std::vector<std::string> lines;
                               for (const auto& e : r.trace.events()) lines.push_back(protocol::serialize_event(e));
                               return lines;
                             })
      .def_property_readonly("bob_state", [](const protocol::ProtocolResult& r) { return amplitudes(r.bob_state); })
      .def_readonly("fidelity", &protocol::ProtocolResult::fidelity)
      .def_readonly("path_probability", &protocol::ProtocolResult::path_probability);

  m.def("run_protocol", &run, "signal"_a, "seed"_a = 0, "bell"_a = py::none(), "charlie"_a = py::none(),
        "One run; forcing needs both outcomes, otherwise draws come from `seed`.");
  m.def("prepare_ghz", [] { return amplitudes(protocol::prepare_ghz()); });

  py::class_<verify::BranchReport>(m, "BranchReport")
      .def_readonly("bell", &verify::BranchReport::bell)
      .def_readonly("charlie", &verify::BranchReport::charlie)
      .def_readonly("probability", &verify::BranchReport::probability)
      .def_readonly("bob_fidelity", &verify::BranchReport::bob_fidelity);
  m.def("enumerate_branches", [](const protocol::SignalState& s) {
    const auto a = verify::enumerate_branches(s);
    return std::vector<verify::BranchReport>(a.begin(), a.end());
  });

  py::class_<verify::SecurityReport>(m, "SecurityReport")
      .def_readonly("bell", &verify::SecurityReport::bell)
      .def_property_readonly("rho", [](const verify::SecurityReport& r) { return rows(r.rho_bob); })
      .def_readonly("raw_fidelity", &verify::SecurityReport::raw_fidelity)
      .def_readonly("unitary_bound", &verify::SecurityReport::unitary_bound);
  m.def("bob_view_before_charlie", &verify::bob_view_before_charlie, "signal"_a, "bell"_a);
  m.def("charlie_view_before_cooperation", &verify::charlie_view_before_cooperation, "signal"_a, "bell"_a);

  py::class_<verify::SweepSummary>(m, "SweepSummary")
      .def_readonly("samples", &verify::SweepSummary::samples)
      .def_readonly("max_bound_deviation", &verify::SweepSummary::max_bound_deviation)
      .def_readonly("max_raw_fidelity_deviation", &verify::SweepSummary::max_raw_fidelity_deviation)
      .def_readonly("max_offdiagonal", &verify::SweepSummary::max_offdiagonal)
      .def_readonly("max_protected_bound", &verify::SweepSummary::max_protected_bound)
      .def_readonly("protected_samples", &verify::SweepSummary::protected_samples);
  m.def("security_sweep", &verify::security_sweep, "samples"_a, "seed"_a = 0);

  py::class_<net::ComparisonReport>(m, "ComparisonReport")
      .def_readonly("match", &net::ComparisonReport::match)
      .def_readonly("fidelity", &net::ComparisonReport::fidelity)
      .def_readonly("reference_fidelity", &net::ComparisonReport::reference_fidelity)
      .def_readonly("party_exit_codes", &net::ComparisonReport::party_exit_codes)
      .def_readonly("detail", &net::ComparisonReport::detail)
      .def_property_readonly("stall",
                             [](const net::ComparisonReport& r) -> std::optional<std::string> {
                               if (!r.stall) return std::nullopt;
                               return net::stall_label(*r.stall);
                             });
  m.def(
      "orchestrate",
      [](const std::filesystem::path& exe, const protocol::SignalState& signal, std::uint64_t seed,
         bool drop_charlie, int timeout_ms) {
        net::OrchestrateConfig cfg;
        cfg.executable = exe;
        cfg.signal = signal;
        cfg.seed = seed;
        cfg.drop_charlie = drop_charlie;
        cfg.timeout = std::chrono::milliseconds(timeout_ms);
        py::gil_scoped_release release;
        return net::orchestrate(cfg);
      },
      "executable"_a, "signal"_a, "seed"_a = 0, "drop_charlie"_a = false, "timeout_ms"_a = 10000,
      "Coordinator plus three parties as child processes of `executable`.");
}
