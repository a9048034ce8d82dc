#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

// Raw two-alternative tallies, targets on rows.
//   selected(i, j):  trials with target i in which option j was chosen
//   presented(i, i): responded trials with target i
//   presented(i, j): responded trials with target i and j as the other option
struct CountMatrix {
  std::vector<std::string> actions;
  std::vector<std::int64_t> selected_cells;
  std::vector<std::int64_t> presented_cells;
  std::int64_t timeouts = 0;

  static CountMatrix zeros(std::vector<std::string> actions);

  std::size_t size() const { return actions.size(); }
  std::int64_t& selected(std::size_t i, std::size_t j) { return selected_cells[i * actions.size() + j]; }
  std::int64_t selected(std::size_t i, std::size_t j) const { return selected_cells[i * actions.size() + j]; }
  std::int64_t& presented(std::size_t i, std::size_t j) { return presented_cells[i * actions.size() + j]; }
  std::int64_t presented(std::size_t i, std::size_t j) const { return presented_cells[i * actions.size() + j]; }

  std::size_t index_of(const std::string& action) const;
  std::int64_t row_sum(std::size_t i) const;

  CountMatrix& operator+=(const CountMatrix& other);
};

nlohmann::json counts_to_json(const CountMatrix& m);
CountMatrix counts_from_json(const nlohmann::json& doc);

}  // namespace kinprim
