#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace osync {

// Malformed values: non-finite entries, non-positive sizes, bad tolerances.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Dimensions of two arguments do not agree.
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Matrix handed to an orthonormalization step does not have full column rank.
struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver ran out of its sweep budget.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, long iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}

  long iterations() const { return iterations_; }

 private:
  long iterations_;
};

// A d x d block fed to the polar projection is numerically singular.
// `iteration` is the surrounding solver iteration, or -1 outside a solve.
class DegenerateBlock : public std::runtime_error {
 public:
  DegenerateBlock(const std::string& what, std::ptrdiff_t block,
                  long iteration = -1)
      : std::runtime_error(what + " (block " + std::to_string(block) +
                           (iteration >= 0
                                ? ", iteration " + std::to_string(iteration)
                                : std::string()) +
                           ")"),
        block_(block),
        iteration_(iteration) {}

  std::ptrdiff_t block() const { return block_; }
  long iteration() const { return iteration_; }

 private:
  std::ptrdiff_t block_;
  long iteration_;
};

}  // namespace osync
