#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "labornet/blockmodel.hpp"
#include "labornet/csv.hpp"
#include "labornet/errors.hpp"
#include "labornet/graph.hpp"

namespace labornet::cli {

namespace {

std::string histogram_csv(std::span<const std::uint64_t> degrees) {
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto d : degrees) counts[d] += 1;
  std::string out = "degree,count\n";
  for (const auto& [d, c] : counts) out += std::to_string(d) + "," + std::to_string(c) + "\n";
  return out;
}

// Truth labels for the nodes present in the graph; extra rows are ignored so
// a truth file written before filtering still applies.
graph::Partition read_truth(const graph::BipartiteGraph& g, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open truth partition " + path.string());
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != std::vector<std::string>{"node_kind", "node_id", "group"}) {
    throw InputError("truth partition needs header node_kind,node_id,group");
  }
  constexpr auto unset = metrics::kMissing;
  std::vector<std::uint32_t> w(g.num_workers(), unset);
  std::vector<std::uint32_t> j(g.num_jobs(), unset);
  while (auto row = reader.next()) {
    const auto line = reader.line_number();
    if (row->size() != 3) throw InputError("truth line " + std::to_string(line) + ": expected 3 fields");
    const auto group = csv::parse_int((*row)[2], "group", line);
    if (group < 0) throw InputError("truth line " + std::to_string(line) + ": negative group");
    if ((*row)[0] == "worker") {
      if (auto idx = g.worker_ids().find((*row)[1])) w[*idx] = static_cast<std::uint32_t>(group);
    } else if ((*row)[0] == "job") {
      if (auto idx = g.job_ids().find((*row)[1])) j[*idx] = static_cast<std::uint32_t>(group);
    } else {
      throw InputError("truth line " + std::to_string(line) + ": node_kind must be worker or job");
    }
  }
  for (const auto v : w) {
    if (v == unset) throw InputError("truth partition misses a worker of the graph");
  }
  for (const auto v : j) {
    if (v == unset) throw InputError("truth partition misses a job of the graph");
  }
  return graph::Partition::from_labels(std::move(w), std::move(j));
}

}  // namespace

int cmd_cluster(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  graph::LoadOptions load;
  load.min_job_workers = static_cast<std::uint32_t>(config.unsigned_int("min_job_workers"));
  const graph::BipartiteGraph g = graph::load_edge_list(config.required("edges"), load);

  sbm::InferenceConfig inf;
  inf.restarts = static_cast<std::uint32_t>(config.unsigned_int("restarts"));
  inf.sweeps_per_restart = static_cast<std::uint32_t>(config.unsigned_int("sweeps"));
  inf.seed = config.unsigned_int("seed");
  inf.epsilon = config.number("epsilon");
  const auto& schedule = config.required("schedule");
  if (schedule == "geometric") {
    inf.schedule.kind = sbm::TemperatureSchedule::Kind::geometric;
  } else if (schedule == "constant") {
    inf.schedule.kind = sbm::TemperatureSchedule::Kind::constant;
  } else {
    throw InputError("schedule must be geometric or constant");
  }
  inf.schedule.start = config.number("anneal_start");
  inf.schedule.end = config.number("anneal_end");
  inf.schedule.anneal_fraction = config.number("anneal_fraction");
  inf.bounds.worker_min = static_cast<std::uint32_t>(config.unsigned_int("worker_groups_min"));
  inf.bounds.worker_max = static_cast<std::uint32_t>(config.unsigned_int("worker_groups_max"));
  inf.bounds.job_min = static_cast<std::uint32_t>(config.unsigned_int("job_groups_min"));
  inf.bounds.job_max = static_cast<std::uint32_t>(config.unsigned_int("job_groups_max"));

  const sbm::InferenceResult result = sbm::infer_partition(g, inf);

  std::ostringstream part;
  graph::write_partition_csv(g, result.partition, part);
  write_text(out_dir / "partition.csv", part.str());

  std::ostringstream js;
  sbm::write_inference_json(result, js);
  auto doc = nlohmann::ordered_json::parse(js.str());
  doc["graph"] = {{"workers", g.num_workers()}, {"jobs", g.num_jobs()}, {"edges", g.total_edges()}};
  if (!config.text("truth").empty()) {
    const auto truth = read_truth(g, config.text("truth"));
    const auto agree = sbm::compare_partitions(result.partition, truth);
    doc["agreement"] = {{"worker_ari", agree.workers.ari}, {"worker_nmi", agree.workers.nmi},
                        {"job_ari", agree.jobs.ari}, {"job_nmi", agree.jobs.nmi}};
  }
  write_text(out_dir / "inference.json", doc.dump(2) + "\n");

  const auto deg = graph::degrees(g);
  write_text(out_dir / "worker_degree_histogram.csv", histogram_csv(deg.workers));
  write_text(out_dir / "job_degree_histogram.csv", histogram_csv(deg.jobs));
  log << "cluster: " << result.partition.num_worker_groups << " worker types, " << result.partition.num_job_groups
      << " markets, " << csv::format_double(result.description_length.total()) << " bits\n";
  return kExitOk;
}

}  // namespace labornet::cli
