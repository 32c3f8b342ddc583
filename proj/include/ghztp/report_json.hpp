#pragma once

// JSON forms of the result and report types. Doubles keep full precision,
// so from_json(to_json(x)) == x.

#include <json.hpp>

#include "ghztp/protocol.hpp"
#include "ghztp/verify.hpp"

namespace ghztp {

nlohmann::json state_to_json(const qsim::StateVector& state);
qsim::StateVector state_from_json(const nlohmann::json& j);

nlohmann::json density_to_json(const qsim::DensityMatrix& rho);
qsim::DensityMatrix density_from_json(const nlohmann::json& j);

nlohmann::json to_json(const protocol::ProtocolResult& r);
protocol::ProtocolResult protocol_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const verify::BranchReport& r);
verify::BranchReport branch_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const verify::SecurityReport& r);
verify::SecurityReport security_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const verify::SweepSummary& s);

}  // namespace ghztp
