// twistlab: run one experiment (or the whole acceptance suite), emit a JSON
// report and optionally a CSV table.  Exit 0 when every check passes, 1 when
// some check fails, 2 on usage or configuration errors.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "twistlab/twistlab.hpp"

namespace {

struct SubState {
  const twistlab::ExperimentInfo* info = nullptr;
  std::map<std::string, std::string> values;  // param key -> raw value
  std::map<std::string, CLI::Option*> opts;
  std::string out_path, csv_path;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional laboratory for twisted sums, centralizers and derivations"};
  app.require_subcommand(1);

  std::vector<const twistlab::ExperimentInfo*> infos;
  for (const auto& e : twistlab::experiment_table()) infos.push_back(&e);
  infos.push_back(&twistlab::acceptance_experiment());

  std::vector<SubState> states(infos.size());
  for (std::size_t i = 0; i < infos.size(); ++i) {
    const auto* info = infos[i];
    CLI::App* sub = app.add_subcommand(info->id, info->summary);
    SubState& st = states[i];
    st.info = info;
    for (const auto& p : info->params)
      st.opts[p.key] = sub->add_option("--" + p.key, st.values[p.key],
                                       p.help + " [" + p.kind + ", default " + p.fallback + "]");
    sub->add_option("--out", st.out_path, "write the JSON report here (default: stdout)");
    sub->add_option("--csv", st.csv_path, "write the result table as CSV here");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const SubState* st = nullptr;
  for (const auto& s : states)
    if (app.got_subcommand(s.info->id)) st = &s;
  if (!st) {
    std::cerr << "twistlab: no experiment selected\n";
    return 2;
  }

  try {
    std::map<std::string, std::string> overrides;
    for (const auto& [key, opt] : st->opts)
      if (opt->count() > 0) overrides[key] = st->values.at(key);

    const twistlab::Report rep = twistlab::run_experiment(*st->info, overrides);

    for (const auto& c : rep.checks)
      std::cerr << (c.pass ? "[pass] " : "[FAIL] ") << c.name << "  (value "
                << twistlab::format_number(c.value) << ", threshold "
                << twistlab::format_number(c.threshold) << ")\n";

    const std::string json = twistlab::report_json(rep).dump(2);
    if (st->out_path.empty())
      std::cout << json << "\n";
    else
      twistlab::write_text_file(st->out_path, json + "\n");
    if (!st->csv_path.empty()) twistlab::write_text_file(st->csv_path, twistlab::report_csv(rep));

    return rep.pass() ? 0 : 1;
  } catch (const twistlab::ConfigError& e) {
    std::cerr << "twistlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "twistlab: " << e.what() << "\n";
    return 2;
  }
}
