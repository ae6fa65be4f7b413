#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "mnl/harness.hpp"

namespace mnl {

std::string format_run_csv(const std::vector<const CellResult*>& cells) {
  std::vector<const CellResult*> sorted = cells;
  std::sort(sorted.begin(), sorted.end(), [](const CellResult* a, const CellResult* b) {
    return std::tie(a->policy, a->seed) < std::tie(b->policy, b->seed);
  });

  std::string out(kRunCsvHeader);
  out += '\n';
  for (const CellResult* cell : sorted) {
    for (const RunRecord& r : cell->records) {
      out += r.policy;
      out += ',';
      out += std::to_string(r.seed);
      out += ',';
      out += std::to_string(r.t);
      out += ',';
      out += format_double(r.inst_regret);
      out += ',';
      out += format_double(r.cum_regret);
      out += ',';
      out += std::to_string(r.round_runtime_ns);
      out += ',';
      out += std::to_string(r.assortment_size);
      out += ',';
      out += r.in_confidence ? '1' : '0';
      out += '\n';
    }
    if (cell->error) {
      out += cell->policy + ',' + std::to_string(cell->seed) + ",0,nan,nan,0,0,0\n";
    }
  }
  return out;
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const SummaryRow& r : rows) {
    out += r.policy + ',' + std::to_string(r.k) + ',' + format_double(r.v0) + ',' +
           std::string(to_string(r.reward_mode)) + ',' + format_double(r.final_regret_mean) + ',' +
           format_double(r.final_regret_std) + ',' + format_double(r.runtime_first_decile_ns) +
           ',' + format_double(r.runtime_last_decile_ns) + '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

  std::map<std::size_t, std::vector<const CellResult*>> by_k;
  for (const CellResult& c : result.cells) by_k[c.k].push_back(&c);

  std::vector<std::filesystem::path> written;
  for (const auto& [k, cells] : by_k) {
    const auto path = dir / ("runs_k" + std::to_string(k) + ".csv");
    write_file(path, format_run_csv(cells));
    written.push_back(path);
  }
  const auto summary = dir / "summary.csv";
  write_file(summary, format_summary_csv(result.summary));
  written.push_back(summary);
  return written;
}

}  // namespace mnl
