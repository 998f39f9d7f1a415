#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mrp {

/// One observed curve: strictly increasing time points in [0,1] and the
/// values recorded there.
struct DiscreteCurve {
  std::vector<double> grid;
  std::vector<double> values;

  std::size_t size() const noexcept { return grid.size(); }
};

/// Raw observations of one group: n samples by p dimensions, each cell with
/// its own (possibly asynchronous) grid. Cells are stored sample-major.
class DiscretePanel {
 public:
  DiscretePanel() = default;
  DiscretePanel(std::string group_label, std::size_t n, std::size_t p);

  const std::string& group_label() const noexcept { return group_label_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }

  DiscreteCurve& at(std::size_t sample, std::size_t dim) { return cells_[sample * p_ + dim]; }
  const DiscreteCurve& at(std::size_t sample, std::size_t dim) const {
    return cells_[sample * p_ + dim];
  }

  /// Labels carried over from ingestion; default to "0", "1", ...
  std::vector<std::string> sample_ids;
  std::vector<std::string> dim_labels;

  /// Smallest observation count over all cells.
  std::size_t min_observations() const;

 private:
  std::string group_label_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<DiscreteCurve> cells_;
};

struct Violation {
  std::size_t sample;
  std::size_t dim;
  std::string message;
};

/// Lists every breached curve/panel invariant. Empty means the panel is valid.
std::vector<Violation> validate_panel(const DiscretePanel& panel);

struct PanelPair {
  DiscretePanel x;
  DiscretePanel y;
};

/// Reads the long CSV format `group,sample_id,dim,t,value` (group X or Y).
/// Samples and dimensions are ordered by label (numerically when both labels
/// are integers), each cell sorted by t. Throws InputError on malformed
/// input, on a dimension mismatch between groups, on duplicate rows, and when
/// the assembled panels fail validation.
PanelPair load_long_csv(std::istream& in);
PanelPair load_long_csv(const std::filesystem::path& path);

/// Reads only the rows of one group ("X" or "Y") from a long CSV; rows of
/// the other group are ignored.
DiscretePanel load_group_csv(std::istream& in, const std::string& group);
DiscretePanel load_group_csv(const std::filesystem::path& path, const std::string& group);

/// Writes both panels in the long CSV format using shortest round-trip
/// decimal representations, so reloading is bit-exact.
void write_long_csv(std::ostream& out, const DiscretePanel& x, const DiscretePanel& y);
void write_long_csv(const std::filesystem::path& path, const DiscretePanel& x,
                    const DiscretePanel& y);

/// Ordering used for sample and dimension labels.
bool label_less(const std::string& a, const std::string& b);

}  // namespace mrp
