#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistlab/experiments.hpp"
#include "twistlab/report.hpp"

namespace twistlab {

// One top-level claim of the suite, assembled from named checks of one or
// more pinned experiment runs.  The pinned configs below are the reference
// workloads; they ignore the environment so results depend on the seed only.
struct CriterionResult {
  int index = 0;
  std::string title;
  std::vector<CheckRecord> checks;
  std::vector<std::string> detail;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

namespace detail {

inline const CheckRecord& pick(const Report& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  throw std::logic_error("acceptance: report '" + rep.id + "' has no check named '" + name + "'");
}

inline void take(CriterionResult& cr, const Report& rep, const std::string& name,
                 const std::string& prefix = "") {
  CheckRecord c = pick(rep, name);
  c.name = prefix + c.name;
  cr.checks.push_back(std::move(c));
}

inline void take_all(CriterionResult& cr, const Report& rep, const std::string& prefix = "") {
  for (CheckRecord c : rep.checks) {
    c.name = prefix + c.name;
    cr.checks.push_back(std::move(c));
  }
}

}  // namespace detail

inline std::vector<CriterionResult> run_acceptance(std::uint64_t seed) {
  std::vector<CriterionResult> out;

  {
    CriterionResult cr{1, "sign-average exactness on the canonical basis", {}, {}};
    const Report r = run_pinned("nabla-growth", {{"m", "1,2,3,4"}, {"mode", "exhaustive"}}, seed);
    detail::take(cr, r, "canonical sign-average matches closed form");
    detail::take(cr, r, "canonical patterns identical");
    detail::take(cr, r, "all sign patterns enumerated");
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{2, "rotated-family growth gap", {}, {}};
    const Report r = run_pinned("nabla-growth", {{"m", "1,2,3,4,5,6"}, {"mode", "auto"}}, seed);
    detail::take(cr, r, "rotated family stays within factor 1.5 of mid-sweep");
    detail::take(cr, r, "normalized gap strictly increasing from m = 2");
    cr.detail.push_back("normalized rotated values relative to the m = 3 value: min " +
                        format_number(detail::pick(r, "rotated family ratio floor (reported)").value) +
                        ", max " +
                        format_number(
                            detail::pick(r, "rotated family stays within factor 1.5 of mid-sweep").value));
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{3, "tree commutator bound and root witness", {}, {}};
    detail::take_all(cr, run_pinned("tree-commutator", {}, seed));
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{4, "parent-shift collapse growth", {}, {}};
    detail::take_all(cr, run_pinned("tree-growth", {}, seed));
    out.push_back(std::move(cr));
  }

  {
    const Report r = run_pinned("interp-differential", {}, seed);
    CriterionResult c5{5, "interpolation anchor identity", {}, {}};
    detail::take(c5, r, "differential matches the entrywise log map");
    out.push_back(std::move(c5));

    CriterionResult c6{6, "extremal function boundary and derivative", {}, {}};
    detail::take(c6, r, "boundary norms equal the interpolated norm");
    detail::take(c6, r, "finite differences match the closed form");
    detail::take(c6, r, "coordinate moduli constant on the critical line");
    out.push_back(std::move(c6));
  }

  {
    CriterionResult cr{7, "flow equation along the critical line", {}, {}};
    detail::take_all(cr, run_pinned("interp-flow", {}, seed), "sup/1: ");
    detail::take_all(cr,
                     run_pinned("interp-flow",
                                {{"p0", "4"}, {"p1", "1.3333333333333333"}, {"w_mode", "random"}},
                                seed),
                     "4/1.33 weighted: ");
    detail::take_all(cr, run_pinned("interp-flow", {{"p0", "2"}, {"p1", "2"}, {"w_mode", "random"}}, seed),
                     "equal exponents: ");
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{8, "operator norm interpolation", {}, {}};
    detail::take_all(cr, run_pinned("riesz-thorin", {}, seed));
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{9, "isometric extension and centralizer growth", {}, {}};
    detail::take_all(cr, run_pinned("lamperti-extension", {}, seed), "extension: ");
    detail::take_all(cr, run_pinned("lamperti-centralizer-growth", {}, seed), "growth: ");
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{10, "averaging to equivariance", {}, {}};
    detail::take_all(cr, run_pinned("averaging-rrr", {}, seed), "signs n=4: ");
    detail::take_all(cr, run_pinned("averaging-rrr", {{"n", "8"}}, seed), "signs n=8: ");
    detail::take_all(cr, run_pinned("averaging-gsame", {}, seed), "conjugate pairs: ");
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{11, "complex structure symmetrization", {}, {}};
    detail::take_all(cr, run_pinned("complex-symmetrize", {}, seed));
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{12, "marked-coordinate example on the sup-normed head", {}, {}};
    const Report r = run_pinned("c0-example", {}, seed);
    detail::take_all(cr, r);
    for (const auto& row : r.table_rows)
      if (row.size() == 2 && row[0].rfind("witness_", 0) == 0)
        cr.detail.push_back("solved " + row[0] + " = " + row[1]);
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{13, "module action and rank-one defects", {}, {}};
    detail::take_all(cr, run_pinned("block-semigroup", {}, seed), "blocks: ");
    detail::take_all(cr, run_pinned("rank1-derivation", {}, seed), "rank one: ");
    out.push_back(std::move(cr));
  }

  {
    CriterionResult cr{14, "equivalence and splitting witnesses", {}, {}};
    detail::take_all(cr, run_pinned("equivalence-check", {}, seed), "equivalence: ");
    detail::take_all(cr, run_pinned("splitting-check", {}, seed), "splitting: ");
    out.push_back(std::move(cr));
  }

  return out;
}

// Aggregate experiment: every criterion contributes one summary check (number
// of failing constituent checks, which must be zero) and the full breakdown
// lands in the table.
inline Report exp_acceptance_all(const Config& cfg) {
  Report rep;
  rep.id = "acceptance-all";
  rep.config = cfg.echo();
  rep.table_header = {"criterion", "check", "value", "threshold", "pass"};
  const auto criteria = run_acceptance(cfg.seed());
  for (const auto& cr : criteria) {
    std::size_t failing = 0;
    for (const auto& c : cr.checks) {
      if (!c.pass) ++failing;
      rep.table_rows.push_back({std::to_string(cr.index), c.name, format_number(c.value),
                                format_number(c.threshold), c.pass ? "1" : "0"});
    }
    rep.check("criterion " + std::to_string(cr.index) + ": " + cr.title,
              static_cast<double>(failing), 0.0, failing == 0,
              "every constituent check of the criterion holds");
  }
  return rep;
}

inline const ExperimentInfo& acceptance_experiment() {
  static const ExperimentInfo info{
      "acceptance-all",
      "the full pinned reference suite, one summary check per criterion",
      {{"seed", "u64", "42", "master random seed"}},
      &exp_acceptance_all};
  return info;
}

// Lookup across the regular table and the aggregate entry; CLI entry point.
inline const ExperimentInfo* find_any_experiment(const std::string& id) {
  if (id == acceptance_experiment().id) return &acceptance_experiment();
  return find_experiment(id);
}

}  // namespace twistlab
