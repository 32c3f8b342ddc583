#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "ghztp/cli.hpp"

using nlohmann::json;

namespace {

struct Ran {
  int code;
  std::string out, err;
};

Ran ghztp_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ghztp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ghztp::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST(CliTest, HelpAndUsage) {
  EXPECT_EQ(ghztp_cli({"--help"}).code, ghztp::cli::kOk);
  EXPECT_EQ(ghztp_cli({}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"teleport"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--bogus"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--preset", "sideways"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--format", "xml"}).code, ghztp::cli::kUsage);
}

TEST(CliTest, SignalValidation) {
  EXPECT_EQ(ghztp_cli({"run", "--alpha", "0", "0", "--beta", "0", "0"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--alpha", "1", "0"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--alpha", "1", "x", "--beta", "0", "0"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--alpha", "1", "0", "--beta", "0", "0", "--preset", "one"}).code,
            ghztp::cli::kUsage);
  // Norm 5 is a mistake, not drift.
  EXPECT_EQ(ghztp_cli({"run", "--alpha", "3", "0", "--beta", "4", "0"}).code, ghztp::cli::kUsage);
  // Drift below 1e-6 is renormalized.
  const auto r = ghztp_cli({"run", "--alpha", "0.6000001", "0", "--beta", "0.8", "0", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const double a = j.at("bob_state")[0][0].get<double>(), b = j.at("bob_state")[1][0].get<double>();
  EXPECT_NEAR(a * a + b * b, 1.0, 1e-12);
  EXPECT_NEAR(a, 0.6000001 / std::hypot(0.6000001, 0.8), 1e-12);
}

TEST(CliTest, RunForcedBranch) {
  const auto r = ghztp_cli({"run", "--preset", "plus", "--force-bell", "PhiPlus", "--force-charlie", "Minus"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "BellMeasured outcome=PhiPlus"));
  EXPECT_TRUE(contains(r.out, "CharlieMeasured outcome=Minus"));
  EXPECT_TRUE(contains(r.out, "CorrectionApplied role=Bob qubit=B unitary=Z"));
  EXPECT_TRUE(contains(r.out, "fidelity: 1"));
  EXPECT_EQ(ghztp_cli({"run", "--force-bell", "PhiPlus"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"run", "--force-bell", "Phi", "--force-charlie", "Plus"}).code, ghztp::cli::kUsage);
}

TEST(CliTest, RunJsonIsFullPrecisionAndDeterministic) {
  const auto a = ghztp_cli({"run", "--preset", "random", "--seed", "17", "--format", "json"});
  const auto b = ghztp_cli({"run", "--preset", "random", "--seed", "17", "--format", "json"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j.at("trace").size(), 11u);
  EXPECT_GE(j.at("fidelity").get<double>(), 1.0 - 1e-10);
}

TEST(CliTest, BasisSignalArrivesExactly) {
  const auto r = ghztp_cli({"run", "--alpha", "1", "0", "--beta", "0", "0", "--seed", "5", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("bob_state")[0][0].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(std::hypot(j.at("bob_state")[1][0].get<double>(), j.at("bob_state")[1][1].get<double>()), 0.0, 1e-12);
}

TEST(CliTest, EnumerateListsEightEqualBranches) {
  const auto r = ghztp_cli({"enumerate", "--preset", "minus", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.size(), 8u);
  double sum = 0.0;
  for (const auto& row : j) {
    EXPECT_NEAR(row.at("probability").get<double>(), 0.125, 1e-12);
    EXPECT_GE(row.at("bob_fidelity").get<double>(), 1.0 - 1e-10);
    sum += row.at("probability").get<double>();
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  const auto human = ghztp_cli({"enumerate", "--preset", "minus"});
  EXPECT_TRUE(contains(human.out, "checksum: sum_p=1 min_fidelity=1"));
}

TEST(CliTest, SecurityReportsBobsBlindState) {
  const auto r = ghztp_cli({"security", "--alpha", "0.6", "0", "--beta", "0.8", "0", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.size(), 4u);
  for (const auto& row : j) {
    // rho = diag(|alpha|^2, |beta|^2) whatever Alice saw.
    EXPECT_NEAR(row.at("raw_fidelity").get<double>(), 0.36 * 0.36 + 0.64 * 0.64, 1e-12);
    EXPECT_NEAR(row.at("unitary_bound").get<double>(), 0.64, 1e-12);
  }
  EXPECT_TRUE(contains(ghztp_cli({"security", "--preset", "zero"}).out, "caveat"));
  EXPECT_FALSE(contains(ghztp_cli({"security", "--preset", "plus"}).out, "caveat"));
}

TEST(CliTest, SecuritySweep) {
  const auto r = ghztp_cli({"security", "--sweep", "200", "--seed", "4"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "max deviation:"));
  EXPECT_EQ(ghztp_cli({"security", "--sweep", "0"}).code, ghztp::cli::kUsage);
}

TEST(CliTest, StatsStayWithinFourSigma) {
  const auto r = ghztp_cli({"stats", "4000", "--seed", "8", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  long bell = 0, charlie = 0;
  for (const auto& row : j.at("rows")) {
    EXPECT_LT(std::abs(row.at("z").get<double>()), 4.0);
    const auto name = row.at("outcome").get<std::string>();
    (name == "Plus" || name == "Minus" ? charlie : bell) += row.at("count").get<long>();
  }
  EXPECT_EQ(bell, 4000);
  EXPECT_EQ(charlie, 4000);
  EXPECT_EQ(ghztp_cli({"stats", "0"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"stats", "40", "--seed", "8"}).out, ghztp_cli({"stats", "40", "--seed", "8"}).out);
}

TEST(CliTest, NetErrors) {
  EXPECT_EQ(ghztp_cli({"net", "party", "--role", "bob", "--port", "1", "--timeout-ms", "200"}).code,
            ghztp::cli::kConnection);
  EXPECT_EQ(ghztp_cli({"net", "party", "--role", "eve"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"net", "party", "--role", "bob", "--die-before-measure"}).code, ghztp::cli::kUsage);
  EXPECT_EQ(ghztp_cli({"net", "orchestrate", "--drop", "bob", "--exe", GHZTP_CLI_PATH}).code, ghztp::cli::kUsage);
}

TEST(CliTest, OrchestrateMatchAndDrop) {
  const auto ok = ghztp_cli({"net", "orchestrate", "--seed", "7", "--alpha", "0.6", "0", "--beta", "0.8", "0",
                             "--exe", GHZTP_CLI_PATH});
  EXPECT_EQ(ok.code, ghztp::cli::kOk) << ok.out << ok.err;
  EXPECT_TRUE(contains(ok.out, "match: true"));
  const auto drop = ghztp_cli({"net", "orchestrate", "--seed", "7", "--preset", "plus", "--drop", "charlie",
                               "--exe", GHZTP_CLI_PATH});
  EXPECT_EQ(drop.code, ghztp::cli::kStalled) << drop.out << drop.err;
  EXPECT_TRUE(contains(drop.out + drop.err, "stalled-at-CharlieMeasure"));
}
