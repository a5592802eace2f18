#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

// Replays a fixed list of uniform draws; throws when exhausted so tests notice
// an unexpected extra draw.
struct ScriptedSource {
  std::vector<double> values;
  std::size_t next = 0;

  ScriptedSource(std::initializer_list<double> v) : values(v) {}

  double uniform() {
    if (next >= values.size()) throw std::out_of_range("ScriptedSource exhausted");
    return values[next++];
  }
  [[nodiscard]] std::size_t consumed() const { return next; }
};
