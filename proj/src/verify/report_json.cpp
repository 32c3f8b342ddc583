#include "ghztp/report_json.hpp"

#include <string>

namespace ghztp {

using nlohmann::json;

namespace {

json complex_to_json(qsim::Complex c) { return json::array({c.real(), c.imag()}); }

qsim::Complex complex_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

json state_to_json(const qsim::StateVector& state) {
  json amps = json::array();
  for (const auto& a : state.amplitudes()) amps.push_back(complex_to_json(a));
  return amps;
}

qsim::StateVector state_from_json(const json& j) {
  std::vector<qsim::Complex> amps;
  for (const auto& a : j) amps.push_back(complex_from_json(a));
  return qsim::StateVector::from_amplitudes(std::move(amps));
}

json density_to_json(const qsim::DensityMatrix& rho) {
  json entries = json::array();
  for (const auto& e : rho.entries()) entries.push_back(complex_to_json(e));
  return json{{"dim", rho.dim()}, {"entries", entries}};
}

qsim::DensityMatrix density_from_json(const json& j) {
  std::vector<qsim::Complex> entries;
  for (const auto& e : j.at("entries")) entries.push_back(complex_from_json(e));
  return qsim::DensityMatrix(j.at("dim").get<std::size_t>(), std::move(entries));
}

json to_json(const protocol::ProtocolResult& r) {
  json trace = json::array();
  for (const auto& e : r.trace.events()) trace.push_back(protocol::serialize_event(e));
  return json{{"trace", trace},
              {"bob_state", state_to_json(r.bob_state)},
              {"fidelity", r.fidelity},
              {"path_probability", r.path_probability}};
}

protocol::ProtocolResult protocol_result_from_json(const json& j) {
  protocol::ProtocolTrace trace;
  for (const auto& line : j.at("trace")) trace.append(protocol::parse_event(line.get<std::string>()));
  return protocol::ProtocolResult{std::move(trace), state_from_json(j.at("bob_state")),
                                  j.at("fidelity").get<double>(),
                                  j.at("path_probability").get<double>()};
}

json to_json(const verify::BranchReport& r) {
  return json{{"bell", qsim::to_string(r.bell)},
              {"charlie", qsim::to_string(r.charlie)},
              {"probability", r.probability},
              {"bob_fidelity", r.bob_fidelity}};
}

verify::BranchReport branch_report_from_json(const json& j) {
  return verify::BranchReport{qsim::parse_bell_outcome(j.at("bell").get<std::string>()),
                              qsim::parse_charlie_outcome(j.at("charlie").get<std::string>()),
                              j.at("probability").get<double>(),
                              j.at("bob_fidelity").get<double>()};
}

json to_json(const verify::SecurityReport& r) {
  return json{{"bell", qsim::to_string(r.bell)},
              {"rho_bob", density_to_json(r.rho_bob)},
              {"raw_fidelity", r.raw_fidelity},
              {"unitary_bound", r.unitary_bound}};
}

verify::SecurityReport security_report_from_json(const json& j) {
  return verify::SecurityReport{qsim::parse_bell_outcome(j.at("bell").get<std::string>()),
                                density_from_json(j.at("rho_bob")),
                                j.at("raw_fidelity").get<double>(),
                                j.at("unitary_bound").get<double>()};
}

json to_json(const verify::SweepSummary& s) {
  return json{{"samples", s.samples},
              {"seed", s.seed},
              {"max_bound_deviation", s.max_bound_deviation},
              {"max_raw_fidelity_deviation", s.max_raw_fidelity_deviation},
              {"max_offdiagonal", s.max_offdiagonal},
              {"min_bound_excess", s.min_bound_excess},
              {"max_bound_excess", s.max_bound_excess},
              {"max_protected_bound", s.max_protected_bound},
              {"protected_samples", s.protected_samples}};
}

}  // namespace ghztp
