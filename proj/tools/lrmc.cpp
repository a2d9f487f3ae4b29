// Command-line front end. Exit codes: 0 success, 1 error, 2 when a
// preset with an expected record does not match it.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lrmc/completer.hpp"
#include "lrmc/error.hpp"
#include "lrmc/estimator.hpp"
#include "lrmc/experiments.hpp"
#include "lrmc/fiber.hpp"
#include "lrmc/generic_rank.hpp"
#include "lrmc/parallel.hpp"
#include "lrmc/partial.hpp"
#include "lrmc/pattern.hpp"

using namespace lrmc;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

void emit_report(const std::string& path, const nlohmann::json& report) {
  if (!path.empty()) write_text(path, report.dump(2) + "\n");
}

int largest_corank1(int n) {
  int r = 0;
  while (circulant1_threshold(r + 1) <= n) ++r;
  return r;
}

int largest_m(int n, int k) {
  if (circulantk_threshold(k, 0) > n) return -1;
  int m = 0;
  while (circulantk_threshold(k, m + 1) <= n) ++m;
  return m;
}

int band_width(const EntryPattern& p) {
  for (int k = 1; k <= p.rows() + 1; ++k)
    if (prime_circulant(p.rows(), k) == p) return k;
  throw PatternShape("pattern is not G'(n,k) for any k");
}

template <typename T>
CompletionCertificate<T> run_method(const std::string& method, const PartialMatrix<T>& a, std::optional<int> rank,
                                    const CompleteOptions& co) {
  const EntryPattern& p = a.pattern();
  if (method == "codimc") {
    int r = rank.value_or(0);
    if (!rank)
      for (const Cell& c : p.unspecified()) r = std::max(r, p.row_degree(c.row));
    return codim_block_complete(a, r, co);
  }
  if (method == "diagstrip") return diag_strip_complete(a, co);
  if (method == "circulant1") return circulant1_complete(a, rank.value_or(largest_corank1(p.rows())), co);
  if (method == "circulantk") {
    const int k = band_width(p);
    const int m = rank.value_or(largest_m(p.rows(), k));
    if (m < 0) throw ThresholdNotMet("n is below c_0 = k - 1");
    return circulantk_complete(a, k, m, co);
  }
  throw ParameterError("method '" + method + "' is not available for this scalar domain");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrmc: low-rank matrix completion lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  std::uint64_t seed = 0;
  std::string pattern_path, report_path, out_path, csv_path, values_path;

  // pattern emit
  auto* pattern_cmd = app.add_subcommand("pattern", "pattern utilities");
  pattern_cmd->require_subcommand(1);
  auto* emit_cmd = pattern_cmd->add_subcommand("emit", "write a named family to a pattern file");
  std::string family;
  emit_cmd->add_option("--family", family, "G(n,k), G'(n,k), S(n,k), K(n,k,r), T2C(n), T2R(n)")->required();
  emit_cmd->add_option("--out", out_path, "pattern file")->required();

  // gcc
  auto* gcc_cmd = app.add_subcommand("gcc", "generic completion rank (exact, prime field)");
  int trials = kDefaultRankTrials;
  gcc_cmd->add_option("--pattern", pattern_path)->required();
  gcc_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
  gcc_cmd->add_option("--seed", seed);
  gcc_cmd->add_option("--report", report_path, "JSON report file");

  // typical
  auto* typical_cmd = app.add_subcommand("typical", "Monte Carlo typical ranks");
  int samples = 0, restarts = 0;
  typical_cmd->add_option("--pattern", pattern_path)->required();
  typical_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber);
  typical_cmd->add_option("--seed", seed);
  typical_cmd->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  typical_cmd->add_option("--report", report_path, "JSON report file");
  typical_cmd->add_option("--csv", csv_path, "histogram CSV file");

  // complete
  auto* complete_cmd = app.add_subcommand("complete", "constructive completion with a certificate");
  std::string method, domain = "auto";
  std::optional<int> rank;
  complete_cmd->add_option("--pattern", pattern_path)->required();
  complete_cmd->add_option("--method", method)
      ->required()
      ->check(CLI::IsMember({"codimc", "diagstrip", "circulant1", "circulantk", "g52"}));
  complete_cmd->add_option("--rank", rank, "codimc: r; circulant1: corank r; circulantk: level m");
  complete_cmd->add_option("--seed", seed);
  complete_cmd->add_option("--out", out_path, "certificate file")->required();
  complete_cmd->add_option("--values", values_path, "partial matrix document (default: sampled from the seed)");
  complete_cmd->add_option("--domain", domain, "exact or real; auto picks exact except for g52")
      ->check(CLI::IsMember({"auto", "exact", "real"}));

  // fiber
  auto* fiber_cmd = app.add_subcommand("fiber", "count complex completions in a finite fiber");
  int fiber_rank = 0, starts = 0;
  fiber_cmd->add_option("--pattern", pattern_path)->required();
  fiber_cmd->add_option("--rank", fiber_rank)->required();
  fiber_cmd->add_option("--starts", starts)->check(CLI::PositiveNumber);
  fiber_cmd->add_option("--seed", seed);
  fiber_cmd->add_option("--values", values_path, "partial matrix document (default: sampled from the seed)");
  fiber_cmd->add_option("--report", report_path, "JSON report file");

  // characterize
  auto* char_cmd = app.add_subcommand("characterize", "is 1 a typical corank?");
  char_cmd->add_option("--pattern", pattern_path)->required();
  char_cmd->add_option("--report", report_path, "JSON report file");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run a named preset");
  std::string preset;
  std::string preset_names;
  for (const auto& p : experiment_presets()) preset_names += "\n  " + p.name + ": " + p.description;
  exp_cmd->add_option("preset", preset, "one of:" + preset_names)->required();
  exp_cmd->add_option("--seed", seed);
  exp_cmd->add_option("--samples", samples, "override the preset's sample count")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--report", report_path, "JSON report file");
  exp_cmd->add_option("--csv", csv_path, "histogram CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const auto t0 = Clock::now();
  try {
    if (emit_cmd->parsed()) {
      const EntryPattern p = PatternFamily::parse(family).instantiate();
      save_pattern(p, out_path);
      std::cout << family << " (" << p.rows() << "x" << p.cols() << ", " << p.num_unspecified()
                << " unspecified)\n"
                << render(p) << "\n";
      return 0;
    }
    if (gcc_cmd->parsed()) {
      const EntryPattern p = load_pattern(pattern_path);
      const RankReport r = generic_completion_rank(p, trials, seed);
      std::cout << "generic completion rank " << r.gcr << ", corank " << r.gcc << " (" << p.rows() << "x"
                << p.cols() << ", " << trials << " trials)\n";
      emit_report(report_path, make_report("gcc", seed, {{"trials", trials}}, to_json(r), seconds_since(t0)));
      return 0;
    }
    if (typical_cmd->parsed()) {
      const EntryPattern p = load_pattern(pattern_path);
      SolverConfig cfg;
      cfg.seed = seed;
      if (samples > 0) cfg.sample_count = samples;
      if (restarts > 0) cfg.restarts = restarts;
      const TypicalRankReport r = estimate_typical(p, cfg);
      std::cout << "generic completion rank " << r.generic_completion_rank << "\n";
      for (auto [rank_value, f] : r.histogram)
        std::cout << "rank " << rank_value << ": " << r.counts.at(rank_value) << " / " << r.samples << " (" << f
                  << ")\n";
      if (r.failures) std::cout << "solver failures: " << r.failures << "\n";
      std::cout << "typical ranks:";
      for (int v : r.inferred_typical_ranks) std::cout << ' ' << v;
      std::cout << "\ntypical coranks:";
      for (int v : r.inferred_typical_coranks) std::cout << ' ' << v;
      std::cout << "\n";
      if (r.gap_anomaly) std::cout << "warning: a rank inside the typical interval fell below the threshold\n";
      if (r.unreliable) std::cout << "warning: more than 5% solver failures, report unreliable\n";
      std::cout << "note: sampled ranks are upper bounds; a missing rank is evidence, not proof\n";
      nlohmann::json body = to_json(r);
      nlohmann::json config = body["config"];
      body.erase("config");
      emit_report(report_path, make_report("typical", seed, config, body, seconds_since(t0)));
      if (!csv_path.empty()) write_text(csv_path, histogram_csv(r));
      return 0;
    }
    if (complete_cmd->parsed()) {
      const EntryPattern p = load_pattern(pattern_path);
      CompleteOptions co;
      co.seed = seed + kCompleterSeedOffset;
      const bool exact = method != "g52" && domain != "real" && values_path.empty();
      if (method == "g52" && domain == "exact") throw ParameterError("g52 runs over the reals only");
      nlohmann::json cert;
      bool ok = false;
      int target = 0, achieved = 0;
      if (exact) {
        const auto c = run_method<Rational>(method, sample_integer_filling(p, seed), rank, co);
        ok = verify_certificate(c).ok;
        target = c.target_rank;
        achieved = c.achieved_rank;
        cert = to_json(c);
      } else {
        const PartialMatrix<double> a =
            values_path.empty() ? sample_gaussian_filling(p, seed) : [&] {
              std::ifstream in(values_path);
              if (!in) throw InputError("cannot read '" + values_path + "'");
              return partial_from_json(nlohmann::json::parse(in));
            }();
        const auto c = method == "g52" ? g52_complete(a, co) : run_method<double>(method, a, rank, co);
        ok = verify_certificate(c).ok;
        target = c.target_rank;
        achieved = c.achieved_rank;
        cert = to_json(c);
      }
      emit_report(out_path, make_report("complete", seed, {{"method", method}, {"domain", exact ? "exact" : "real"}},
                                        cert, seconds_since(t0)));
      std::cout << method << ": target rank " << target << ", achieved " << achieved << ", "
                << cert["steps"].size() << " steps, verification " << (ok ? "ok" : "FAILED: ")
                << (ok ? "" : cert["verification"]["diagnostic"].get<std::string>()) << "\n";
      return ok ? 0 : 1;
    }
    if (fiber_cmd->parsed()) {
      const EntryPattern p = load_pattern(pattern_path);
      FiberConfig fc;
      fc.seed = seed + kFiberSeedOffset;
      fc.starts = starts;
      const PartialMatrix<double> a = values_path.empty() ? sample_gaussian_filling(p, seed) : [&] {
        std::ifstream in(values_path);
        if (!in) throw InputError("cannot read '" + values_path + "'");
        return partial_from_json(nlohmann::json::parse(in));
      }();
      const FiberReport r = enumerate_fiber(a, fiber_rank, fc);
      std::cout << r.solutions.size() << " distinct certified completions of rank " << fiber_rank << " ("
                << r.real_count << " real, " << r.complex_count << " non-real) from " << r.converged_starts << " / "
                << r.starts_used << " starts\n"
                << "note: the count is a lower bound on the fiber size\n";
      emit_report(report_path, make_report("fiber", seed, {{"rank", fiber_rank}, {"starts", r.starts_used}},
                                           to_json(r), seconds_since(t0)));
      return 0;
    }
    if (char_cmd->parsed()) {
      const EntryPattern p = load_pattern(pattern_path);
      const CorankOneVerdict v = has_typical_corank_one(p);
      const RankReport g = generic_completion_rank(p);
      std::cout << "1 is " << (v.typical ? "" : "not ") << "a typical corank (case: " << to_string(v.which)
                << "); generic completion corank " << g.gcc << "\n";
      emit_report(report_path,
                  make_report("characterize", 0, nlohmann::json::object(),
                              {{"pattern", pattern_to_json(p)}, {"typical_corank_one", v.typical},
                               {"case", std::string(to_string(v.which))}, {"generic_completion_corank", g.gcc}},
                              seconds_since(t0)));
      return 0;
    }
    if (exp_cmd->parsed()) {
      ExperimentOptions eo;
      eo.seed = seed;
      eo.samples = samples;
      eo.restarts = restarts;
      const ExperimentResult r = run_experiment(preset, eo);
      std::cout << "experiment " << preset << " (seed " << seed << ")\n" << r.text;
      emit_report(report_path, make_report("experiment " + preset, seed, r.config, r.body, seconds_since(t0)));
      if (!csv_path.empty() && !r.csv.empty()) write_text(csv_path, r.csv);
      return r.has_expected && !r.matched ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
