#include "labornet/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "labornet/csv.hpp"
#include "labornet/errors.hpp"

namespace labornet {

WorkerPanel::WorkerPanel(std::vector<std::string> worker_ids,
                         std::vector<Observation> observations,
                         std::map<std::string, std::vector<std::string>> labels)
    : worker_ids_(std::move(worker_ids)),
      observations_(std::move(observations)),
      labels_(std::move(labels)) {
  const std::size_t n = worker_ids_.size();
  if (n == 0) throw InputError("panel has no workers");
  if (observations_.size() % n != 0) throw InputError("panel is not balanced");
  periods_ = static_cast<std::uint32_t>(observations_.size() / n);
  for (std::size_t k = 0; k < observations_.size(); ++k) {
    const auto& o = observations_[k];
    const std::string where = "worker " + worker_ids_[k / periods_] + " period " +
                              std::to_string(o.period);
    if (o.worker != k / periods_ || o.period != k % periods_ + 1) {
      throw InputError("panel must hold periods 1..T for every worker in order (" + where + ")");
    }
    if (o.period > 1 && o.type != observations_[k - 1].type) {
      throw InputError("worker type changes across periods (" + where + ")");
    }
    if (o.period == 1 && !o.separated) throw InputError("first period must be a separation (" + where + ")");
    if (o.employed()) {
      if (!(o.earnings > 0.0) || !std::isfinite(o.earnings)) {
        throw InputError("employed observation needs positive earnings (" + where + ")");
      }
    } else if (!std::isnan(o.earnings)) {
      throw InputError("non-employed observation carries earnings (" + where + ")");
    }
    num_types_ = std::max(num_types_, o.type + 1);
    num_markets_ = std::max(num_markets_, o.market);
  }
  for (const auto& [name, values] : labels_) {
    if (values.size() != observations_.size()) {
      throw InputError("label column " + name + " has the wrong length");
    }
  }
}

void WorkerPanel::set_dimensions(std::uint32_t num_types, std::uint32_t num_markets) {
  if (num_types < num_types_ || num_markets < num_markets_) {
    throw InputError("panel dimensions smaller than observed labels");
  }
  num_types_ = num_types;
  num_markets_ = num_markets;
}

const std::vector<std::string>& WorkerPanel::label(const std::string& name) const {
  auto it = labels_.find(name);
  if (it == labels_.end()) throw InputError("panel has no label column " + name);
  return it->second;
}

WorkerPanel read_panel_csv(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  const std::vector<std::string> required = {"worker_id", "t", "iota", "gamma", "omega", "c"};
  if (!header || header->size() < required.size() ||
      !std::equal(required.begin(), required.end(), header->begin())) {
    throw InputError("expected panel header worker_id,t,iota,gamma,omega,c[,labels...]");
  }
  const std::vector<std::string> label_names(header->begin() + required.size(), header->end());

  struct Row {
    std::uint32_t worker;
    Observation obs;
    std::vector<std::string> labels;
  };
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::uint32_t> lookup;
  std::vector<Row> rows;
  while (auto fields = reader.next()) {
    const auto line = reader.line_number();
    const auto prefix = "line " + std::to_string(line) + ": ";
    if (fields->size() != header->size()) throw InputError(prefix + "wrong number of fields");
    const auto& f = *fields;
    auto [it, inserted] = lookup.emplace(f[0], static_cast<std::uint32_t>(ids.size()));
    if (inserted) ids.push_back(f[0]);
    Observation o;
    const auto t = csv::parse_int(f[1], "t", line);
    const auto iota = csv::parse_int(f[2], "iota", line);
    const auto gamma = csv::parse_int(f[3], "gamma", line);
    const auto c = csv::parse_int(f[5], "c", line);
    if (t < 1) throw InputError(prefix + "t must be >= 1");
    if (iota < 0) throw InputError(prefix + "iota must be >= 0");
    if (gamma < 0) throw InputError(prefix + "gamma must be >= 0");
    if (c != 0 && c != 1) throw InputError(prefix + "c must be 0 or 1");
    o.period = static_cast<std::uint32_t>(t);
    o.type = static_cast<std::uint32_t>(iota);
    o.market = static_cast<std::uint32_t>(gamma);
    o.separated = c == 1;
    if (o.market != 0) {
      if (f[4].empty()) throw InputError(prefix + "employed row is missing omega");
      o.earnings = csv::parse_double(f[4], "omega", line);
      if (!(o.earnings > 0.0)) throw InputError(prefix + "omega must be positive");
    } else if (!f[4].empty()) {
      throw InputError(prefix + "gamma=0 row must leave omega empty");
    }
    rows.push_back({it->second, o, {f.begin() + required.size(), f.end()}});
  }
  if (rows.empty()) throw InputError("panel has no observations");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.worker != b.worker ? a.worker < b.worker : a.obs.period < b.obs.period;
  });
  std::vector<Observation> obs;
  std::map<std::string, std::vector<std::string>> labels;
  for (const auto& name : label_names) labels[name].reserve(rows.size());
  obs.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && rows[k].worker == rows[k - 1].worker &&
        rows[k].obs.period == rows[k - 1].obs.period) {
      throw InputError("duplicate observation for worker " + ids[rows[k].worker] + " period " +
                       std::to_string(rows[k].obs.period));
    }
    Observation o = rows[k].obs;
    o.worker = rows[k].worker;
    obs.push_back(o);
    for (std::size_t c = 0; c < label_names.size(); ++c) {
      labels[label_names[c]].push_back(rows[k].labels[c]);
    }
  }
  return WorkerPanel(std::move(ids), std::move(obs), std::move(labels));
}

WorkerPanel load_panel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open panel " + path.string());
  return read_panel_csv(in);
}

void write_panel_csv(const WorkerPanel& panel, std::ostream& out) {
  out << "worker_id,t,iota,gamma,omega,c";
  for (const auto& [name, values] : panel.labels()) out << ',' << csv::quote_if_needed(name);
  out << '\n';
  const auto& obs = panel.observations();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto& o = obs[k];
    out << csv::quote_if_needed(panel.worker_ids()[o.worker]) << ',' << o.period << ','
        << o.type << ',' << o.market << ',';
    if (o.employed()) out << csv::format_double(o.earnings);
    out << ',' << (o.separated ? 1 : 0);
    for (const auto& [name, values] : panel.labels()) out << ',' << csv::quote_if_needed(values[k]);
    out << '\n';
  }
}

std::vector<std::uint32_t> integer_label(const WorkerPanel& panel, const std::string& name) {
  const auto& values = panel.label(name);
  std::vector<std::uint32_t> out(values.size(), UINT32_MAX);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].empty()) continue;
    const auto v = csv::parse_int(values[k], name, k + 1);
    if (v < 0) throw InputError("label " + name + " must be non-negative");
    out[k] = static_cast<std::uint32_t>(v);
  }
  return out;
}

}  // namespace labornet
