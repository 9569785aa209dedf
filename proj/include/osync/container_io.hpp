#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "osync/synth.hpp"
#include "osync/types.hpp"

namespace osync {

// File layout: the magic line "OSYN1", one single-line JSON header, then the
// payload as row-major float64 little-endian. Writes are byte-deterministic:
// `created` stays empty unless SOURCE_DATE_EPOCH is set in the environment.

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : IoError {
  using IoError::IoError;
};

struct ContainerHeader {
  std::string kind;  // observation | noise | leave_one_out | generic |
                     // truth | solution
  Index n = 0;
  Index d = 0;
  double sigma = 0;
  std::uint64_t seed = 0;
  std::string prng_id;
  bool diagonal_noise = true;
  std::string created;
  int m = -1;  // zeroed block for leave_one_out, otherwise -1

  /// True for the square matrix kinds, false for the (n*d) x d stack kinds.
  bool is_square() const;
};

struct Container {
  ContainerHeader header;
  Mat payload;
};

/// ISO-8601 UTC stamp from SOURCE_DATE_EPOCH, or "" when unset.
std::string created_stamp();

void write_container(const std::string& path, const ContainerHeader& header,
                     const Mat& payload);

Container read_container(const std::string& path);

/// Header prefilled from a generation spec; kind still has to be chosen.
ContainerHeader header_for(const SynthSpec& spec, const std::string& kind);

BlockSym to_block_sym(const Container& c);
OrthoStack to_stack(const Container& c);

}  // namespace osync
