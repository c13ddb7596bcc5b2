#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace labornet {

// One worker-period record. Market 0 is non-employment.
struct Observation {
  std::uint32_t worker = 0;
  std::uint32_t period = 1;
  std::uint32_t type = 0;
  std::uint32_t market = 0;
  double earnings = std::numeric_limits<double>::quiet_NaN();
  bool separated = true;

  bool employed() const { return market != 0; }
};

// Balanced panel: every worker has periods 1..T, observations are ordered by
// (worker, period), the first period is always a separation, and earnings are
// positive exactly when employed. Extra label columns (job, sector, ...) are
// stored as strings, one value per observation; empty means missing.
class WorkerPanel {
 public:
  WorkerPanel() = default;
  WorkerPanel(std::vector<std::string> worker_ids, std::vector<Observation> observations,
              std::map<std::string, std::vector<std::string>> labels = {});

  std::size_t num_workers() const { return worker_ids_.size(); }
  std::uint32_t num_periods() const { return periods_; }
  // Max type + 1 and max market, so empty trailing groups need explicit sizes.
  std::uint32_t num_types() const { return num_types_; }
  std::uint32_t num_markets() const { return num_markets_; }
  void set_dimensions(std::uint32_t num_types, std::uint32_t num_markets);

  const std::vector<Observation>& observations() const { return observations_; }
  const Observation& at(std::uint32_t worker, std::uint32_t period) const {
    return observations_[static_cast<std::size_t>(worker) * periods_ + (period - 1)];
  }
  const std::vector<std::string>& worker_ids() const { return worker_ids_; }

  bool has_label(const std::string& name) const { return labels_.count(name) > 0; }
  // Throws InputError for an unknown column.
  const std::vector<std::string>& label(const std::string& name) const;
  const std::map<std::string, std::vector<std::string>>& labels() const { return labels_; }

 private:
  std::vector<std::string> worker_ids_;
  std::vector<Observation> observations_;
  std::map<std::string, std::vector<std::string>> labels_;
  std::uint32_t periods_ = 0;
  std::uint32_t num_types_ = 0;
  std::uint32_t num_markets_ = 0;
};

// CSV columns worker_id,t,iota,gamma,omega,c followed by optional label
// columns. gamma=0 rows leave omega empty.
WorkerPanel read_panel_csv(std::istream& in);
WorkerPanel load_panel(const std::filesystem::path& path);
void write_panel_csv(const WorkerPanel& panel, std::ostream& out);

// Parses a label column of non-negative integers; missing entries become
// UINT32_MAX.
std::vector<std::uint32_t> integer_label(const WorkerPanel& panel, const std::string& name);

}  // namespace labornet
