#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labornet/panel.hpp"

namespace labornet::graph {

struct TransitionRate {
  std::string label;
  // "all", "firm_change" or "no_firm_change".
  std::string subset;
  std::size_t events = 0;
  std::size_t changed = 0;
  // changed / events; undefined (NaN) when events == 0.
  double rate = 0.0;
};

// A job-change event is a separation (c = 1, t > 1) between two employed
// periods at different values of job_label. For each labeling, the share of
// events where that label differs from the prior period. With a firm label,
// rows are also split by whether the firm changed. Panels without events
// return an empty table.
std::vector<TransitionRate> transition_change_rates(const WorkerPanel& panel,
                                                    const std::string& job_label,
                                                    const std::vector<std::string>& labelings,
                                                    const std::optional<std::string>& firm_label = {});

}  // namespace labornet::graph
