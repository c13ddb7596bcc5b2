#include "labornet/transitions.hpp"

#include <cmath>
#include <limits>

#include "labornet/errors.hpp"

namespace labornet::graph {
namespace {

// "market" refers to the gamma column; everything else to a label column.
std::vector<std::string> column(const WorkerPanel& panel, const std::string& name) {
  if (name == "market" && !panel.has_label(name)) {
    std::vector<std::string> out;
    out.reserve(panel.observations().size());
    for (const auto& o : panel.observations()) {
      out.push_back(o.employed() ? std::to_string(o.market) : std::string());
    }
    return out;
  }
  return panel.label(name);
}

}  // namespace

std::vector<TransitionRate> transition_change_rates(const WorkerPanel& panel,
                                                    const std::string& job_label,
                                                    const std::vector<std::string>& labelings,
                                                    const std::optional<std::string>& firm_label) {
  if (labelings.empty()) throw InputError("at least one labeling is required");
  const auto jobs = column(panel, job_label);
  std::vector<std::vector<std::string>> columns;
  for (const auto& name : labelings) columns.push_back(column(panel, name));
  std::vector<std::string> firms;
  if (firm_label) firms = column(panel, *firm_label);

  const auto& obs = panel.observations();
  std::vector<std::size_t> events;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto& o = obs[k];
    if (o.period == 1 || !o.separated) continue;
    const auto& prev = obs[k - 1];
    if (!o.employed() || !prev.employed()) continue;
    if (jobs[k].empty() || jobs[k - 1].empty()) {
      throw InputError("job label missing on an employed observation of worker " +
                       panel.worker_ids()[o.worker]);
    }
    if (jobs[k] != jobs[k - 1]) events.push_back(k);
  }
  if (events.empty()) return {};

  std::vector<TransitionRate> table;
  auto add = [&](const std::string& name, const std::vector<std::string>& values,
                 const std::string& subset, auto&& keep) {
    TransitionRate row{name, subset};
    for (auto k : events) {
      if (!keep(k)) continue;
      if (values[k].empty() || values[k - 1].empty()) {
        throw InputError("labeling " + name + " missing for worker " +
                         panel.worker_ids()[obs[k].worker] + " period " +
                         std::to_string(obs[k].period));
      }
      ++row.events;
      if (values[k] != values[k - 1]) ++row.changed;
    }
    row.rate = row.events ? static_cast<double>(row.changed) / static_cast<double>(row.events)
                          : std::numeric_limits<double>::quiet_NaN();
    table.push_back(row);
  };
  for (std::size_t c = 0; c < labelings.size(); ++c) {
    add(labelings[c], columns[c], "all", [](std::size_t) { return true; });
    if (firm_label) {
      auto firm_changed = [&](std::size_t k) {
        if (firms[k].empty() || firms[k - 1].empty()) {
          throw InputError("firm label missing for worker " + panel.worker_ids()[obs[k].worker]);
        }
        return firms[k] != firms[k - 1];
      };
      add(labelings[c], columns[c], "firm_change", firm_changed);
      add(labelings[c], columns[c], "no_firm_change",
          [&](std::size_t k) { return !firm_changed(k); });
    }
  }
  return table;
}

}  // namespace labornet::graph
