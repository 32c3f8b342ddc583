// One PASS/FAIL line per acceptance criterion; exit 0 iff all pass.
// Usage: acceptance [path-to-ghztp]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "ghztp/net.hpp"
#include "ghztp/verify.hpp"

using namespace ghztp;
using protocol::SignalState;
using qsim::BellOutcome;
using qsim::CharlieOutcome;
using qsim::Complex;

namespace {

constexpr std::array kBell = {BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus,
                              BellOutcome::PsiMinus};
constexpr std::array kCharlie = {CharlieOutcome::Plus, CharlieOutcome::Minus};

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// |<s|v>|^2 straight from the amplitudes.
double overlap(const SignalState& s, const qsim::StateVector& v) {
  const auto a = v.amplitudes();
  return std::norm(std::conj(s.alpha()) * a[0] + std::conj(s.beta()) * a[1]);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Outcome exact_teleportation() {
  Outcome r;
  qsim::Rng rng(101);
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const auto s = SignalState::random(rng);
    for (auto b : kBell) {
      for (auto c : kCharlie) {
        const auto res = protocol::run_protocol(s, protocol::ForcedPolicy{b, c});
        worst = std::min({worst, res.fidelity, overlap(s, res.bob_state)});
      }
    }
  }
  r.require(worst >= 1.0 - 1e-10, "worst fidelity " + fmt(worst));
  r.detail = r.ok ? "800 branches, worst fidelity 1-" + fmt(1.0 - worst) : r.detail;
  return r;
}

Outcome common_form() {
  Outcome r;
  qsim::Rng rng(202);
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const auto s = SignalState::random(rng);
    // alpha|00> + beta|11> on (B, C)
    std::vector<Complex> target(4, Complex{});
    target[0] = s.alpha();
    target[3] = s.beta();
    const auto want = qsim::StateVector::from_amplitudes(std::move(target));
    for (auto b : kBell) {
      auto session = protocol::compose_session(s);
      protocol::alice_bell_measure(session, qsim::OutcomeSelector::forced(static_cast<int>(b)));
      protocol::apply_bell_correction(session, b);
      const std::array keep = {protocol::index(protocol::Qubit::B), protocol::index(protocol::Qubit::C)};
      const auto rho = qsim::partial_trace(session.state(), keep);
      // <want|rho|want>, summed by hand.
      const auto e = rho.entries();
      const auto w = want.amplitudes();
      Complex f{};
      for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) f += std::conj(w[x]) * e[x * 4 + y] * w[y];
      }
      worst = std::min(worst, f.real());
    }
  }
  r.require(worst >= 1.0 - 1e-10, "worst BC fidelity " + fmt(worst));
  r.detail = r.ok ? "400 corrected states, worst 1-" + fmt(1.0 - worst) : r.detail;
  return r;
}

Outcome branch_probabilities() {
  Outcome r;
  qsim::Rng rng(303);
  for (int i = 0; i < 20; ++i) {
    const auto branches = verify::enumerate_branches(SignalState::random(rng));
    double sum = 0.0;
    for (const auto& br : branches) {
      r.require(std::abs(br.probability - 0.125) <= 1e-10, "branch probability " + fmt(br.probability));
      sum += br.probability;
    }
    r.require(std::abs(sum - 1.0) <= 1e-10, "branch sum " + fmt(sum));
  }
  constexpr int n = 10000;
  std::array<int, 4> bell{};
  std::array<int, 2> charlie{};
  qsim::Rng signals(304);
  for (int i = 0; i < n; ++i) {
    const auto res = protocol::run_protocol(SignalState::random(signals), protocol::SeededPolicy{5000u + i});
    for (const auto& e : res.trace.events()) {
      if (const auto* m = std::get_if<protocol::event::BellMeasured>(&e)) ++bell[static_cast<int>(m->outcome)];
      if (const auto* m = std::get_if<protocol::event::CharlieMeasured>(&e)) ++charlie[static_cast<int>(m->outcome)];
    }
  }
  double worst_z = 0.0;
  auto z = [&](int count, double p) {
    const double sigma = std::sqrt(p * (1 - p) / n);
    return std::abs(static_cast<double>(count) / n - p) / sigma;
  };
  for (int c : bell) worst_z = std::max(worst_z, z(c, 0.25));
  for (int c : charlie) worst_z = std::max(worst_z, z(c, 0.5));
  r.require(worst_z < 4.0, "outcome frequency at " + fmt(worst_z) + " sigma");
  if (r.ok) r.detail = "8x20 branches at 1/8, Monte Carlo max |z| " + fmt(worst_z);
  return r;
}

Outcome security_bound() {
  Outcome r;
  qsim::Rng rng(404);
  double worst_protected = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = SignalState::random(rng);
    const double p0 = std::norm(s.alpha()), p1 = std::norm(s.beta());
    for (auto b : kBell) {
      const auto rep = verify::bob_view_before_charlie(s, b);
      const auto e = rep.rho_bob.entries();
      r.require(std::abs(e[1]) <= 1e-12 && std::abs(e[2]) <= 1e-12, "off-diagonal " + fmt(std::abs(e[1])));
      r.require(std::abs(rep.raw_fidelity - (p0 * p0 + p1 * p1)) <= 1e-10, "raw fidelity " + fmt(rep.raw_fidelity));
      r.require(std::abs(rep.unitary_bound - std::max(p0, p1)) <= 1e-10, "bound " + fmt(rep.unitary_bound));
      if (std::min(p0, p1) > 1e-3) {
        r.require(rep.unitary_bound < 1.0 - 1e-4, "protected bound " + fmt(rep.unitary_bound));
        worst_protected = std::max(worst_protected, rep.unitary_bound);
      }
    }
  }
  if (r.ok) r.detail = "4000 views, max protected bound " + fmt(worst_protected);
  return r;
}

Outcome networked(const std::filesystem::path& exe) {
  Outcome r;
  if (!std::filesystem::exists(exe)) {
    r.require(false, "no ghztp binary at " + exe.string());
    return r;
  }
  qsim::Rng rng(505);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    net::OrchestrateConfig cfg;
    cfg.executable = exe;
    cfg.signal = SignalState::random(rng);
    cfg.seed = seed;
    cfg.timeout = std::chrono::seconds(10);
    const auto rep = net::orchestrate(cfg);
    r.require(rep.fidelity_equal, "seed " + std::to_string(seed) + ": fidelity differs (" + rep.detail + ")");
    r.require(rep.phase_order_ok, "seed " + std::to_string(seed) + ": phase order (" + rep.detail + ")");
    r.require(rep.match, "seed " + std::to_string(seed) + ": " + rep.detail);
  }
  net::OrchestrateConfig drop;
  drop.executable = exe;
  drop.signal = SignalState(0.6, 0.8);
  drop.seed = 7;
  drop.drop_charlie = true;
  drop.timeout = std::chrono::seconds(10);
  const auto rep = net::orchestrate(drop);
  r.require(rep.stall.has_value(), "dropped Charlie did not stall");
  if (rep.stall) {
    r.require(rep.stall->reached < protocol::Phase::Done, "Bob reached Done without Charlie");
    r.require(!rep.party_exit_codes.empty() && rep.party_exit_codes.at(1) != 0, "Bob exited cleanly");
    if (r.ok) r.detail = "10 seeds identical; drop: " + net::stall_label(*rep.stall);
  }
  return r;
}

Outcome substrate() {
  Outcome r;
  const auto ghz = protocol::prepare_ghz();
  const auto a = ghz.amplitudes();
  const double h = 1.0 / std::sqrt(2.0);
  r.require(a.size() == 8, "GHZ has " + std::to_string(a.size()) + " amplitudes");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double want = (i == 0 || i == 7) ? h : 0.0;
    r.require(std::abs(a[i] - Complex(want, 0)) <= 1e-12, "GHZ amplitude " + std::to_string(i));
  }

  std::vector<qsim::Unitary2x2> us;
  for (const auto& c : protocol::bell_correction_table()) {
    us.push_back(c.bob.matrix);
    us.push_back(c.charlie.matrix);
  }
  for (const auto& c : protocol::charlie_correction_table()) us.push_back(c.matrix);
  for (const auto& u : us) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        Complex s{};
        for (int k = 0; k < 2; ++k) s += std::conj(u.at(k, i)) * u.at(k, j);
        r.require(std::abs(s - Complex(i == j ? 1.0 : 0.0, 0)) <= 1e-12, "correction unitary not unitary");
      }
    }
  }

  std::mt19937_64 gen(606);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + i % 4;
    std::vector<Complex> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& x : amps) {
      x = {normal(gen), normal(gen)};
      norm += std::norm(x);
    }
    for (auto& x : amps) x /= std::sqrt(norm);
    const auto state = qsim::StateVector::from_amplitudes(std::move(amps));
    // cos t |0> + e^{i p} sin t |1>, and its orthogonal partner.
    const double t = angle(gen) / 2, p = angle(gen);
    const qsim::MeasurementBasis basis({Complex(std::cos(t), 0), std::polar(std::sin(t), p)},
                                       {-std::polar(std::sin(t), -p), Complex(std::cos(t), 0)});
    for (int q = 0; q < n; ++q) {
      for (const auto& b : {basis, qsim::MeasurementBasis::computational(), qsim::MeasurementBasis::plus_minus()}) {
        const auto pr = qsim::basis_probabilities(state, q, b);
        worst = std::max(worst, std::abs(pr[0] + pr[1] - 1.0));
      }
    }
    if (n >= 2) {
      const auto pr = qsim::bell_probabilities(state, 0, n - 1);
      worst = std::max(worst, std::abs(pr[0] + pr[1] + pr[2] + pr[3] - 1.0));
    }
  }
  r.require(worst <= 1e-10, "probabilities sum off by " + fmt(worst));
  if (r.ok) r.detail = "GHZ exact, " + std::to_string(us.size()) + " unitaries, max sum error " + fmt(worst);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path exe = argc > 1 ? argv[1] : GHZTP_CLI_PATH;
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"exact-teleportation", 1.0, exact_teleportation},
      {"common-form", 1.0, common_form},
      {"branch-probabilities", 10.0, branch_probabilities},
      {"security-bound", 5.0, security_bound},
      {"networked-equivalence", 60.0, [&] { return networked(exe); }},
      {"substrate-sanity", 5.0, substrate},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs < c.limit_s, "took " + fmt(secs) + " s, limit " + fmt(c.limit_s) + " s");
    std::printf("%s %d %s (%.3f s): %s\n", out.ok ? "PASS" : "FAIL", index, c.name, secs, out.detail.c_str());
    failed += out.ok ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
