#include "osync/container_io.hpp"

#include <bit>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

namespace osync {
namespace {

static_assert(std::endian::native == std::endian::little,
              "payload codec assumes a little-endian host");

constexpr char kMagic[] = "OSYN1";

bool is_matrix_kind(const std::string& kind) {
  return kind == "observation" || kind == "noise" || kind == "leave_one_out" ||
         kind == "generic";
}

bool is_stack_kind(const std::string& kind) {
  return kind == "truth" || kind == "solution";
}

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::RowMajor>;

}  // namespace

bool ContainerHeader::is_square() const { return is_matrix_kind(kind); }

std::string created_stamp() {
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (!epoch || !*epoch) return "";
  char* end = nullptr;
  const long long t = std::strtoll(epoch, &end, 10);
  if (end == epoch || *end) return "";
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  if (!gmtime_r(&tt, &tm)) return "";
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ContainerHeader header_for(const SynthSpec& spec, const std::string& kind) {
  ContainerHeader h;
  h.kind = kind;
  h.n = spec.n;
  h.d = spec.d;
  h.sigma = spec.sigma;
  h.seed = spec.seed;
  h.prng_id = kPrngId;
  h.diagonal_noise = spec.diagonal_noise;
  h.created = created_stamp();
  return h;
}

void write_container(const std::string& path, const ContainerHeader& header,
                     const Mat& payload) {
  if (!is_matrix_kind(header.kind) && !is_stack_kind(header.kind))
    throw FormatError("write_container: unknown kind '" + header.kind + "'");
  const Index nd = header.n * header.d;
  const Index want_cols = header.is_square() ? nd : header.d;
  if (payload.rows() != nd || payload.cols() != want_cols)
    throw FormatError("write_container: payload shape does not match header");

  nlohmann::json j{{"kind", header.kind},
                   {"n", header.n},
                   {"d", header.d},
                   {"sigma", header.sigma},
                   {"seed", header.seed},
                   {"prng_id", header.prng_id},
                   {"diagonal_noise", header.diagonal_noise},
                   {"created", header.created}};
  if (header.kind == "leave_one_out") j["m"] = header.m;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_container: cannot open '" + path + "'");
  out << kMagic << '\n' << j.dump() << '\n';
  const RowMajorMat rm = payload;
  out.write(reinterpret_cast<const char*>(rm.data()),
            std::streamsize(sizeof(double)) * rm.size());
  if (!out) throw IoError("write_container: short write to '" + path + "'");
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_container: cannot open '" + path + "'");

  std::string magic, header_line;
  if (!std::getline(in, magic) || magic != kMagic)
    throw FormatError("read_container: bad magic in '" + path + "'");
  if (!std::getline(in, header_line))
    throw FormatError("read_container: missing header in '" + path + "'");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("read_container: bad header JSON: ") +
                      e.what());
  }

  Container c;
  try {
    c.header.kind = j.at("kind").get<std::string>();
    c.header.n = j.at("n").get<Index>();
    c.header.d = j.at("d").get<Index>();
    c.header.sigma = j.at("sigma").get<double>();
    c.header.seed = j.at("seed").get<std::uint64_t>();
    c.header.prng_id = j.at("prng_id").get<std::string>();
    c.header.diagonal_noise = j.at("diagonal_noise").get<bool>();
    c.header.created = j.at("created").get<std::string>();
    c.header.m = j.value("m", -1);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("read_container: header field missing: ") +
                      e.what());
  }
  if (!is_matrix_kind(c.header.kind) && !is_stack_kind(c.header.kind))
    throw FormatError("read_container: unknown kind '" + c.header.kind + "'");
  if (c.header.n < 1 || c.header.d < 1)
    throw FormatError("read_container: non-positive dimensions");

  const Index nd = c.header.n * c.header.d;
  const Index cols = c.header.is_square() ? nd : c.header.d;
  RowMajorMat rm(nd, cols);
  in.read(reinterpret_cast<char*>(rm.data()),
          std::streamsize(sizeof(double)) * rm.size());
  if (in.gcount() != std::streamsize(sizeof(double)) * rm.size())
    throw FormatError("read_container: truncated payload in '" + path + "'");
  if (in.peek() != std::ifstream::traits_type::eof())
    throw FormatError("read_container: trailing bytes in '" + path + "'");
  c.payload = rm;
  return c;
}

BlockSym to_block_sym(const Container& c) {
  if (!c.header.is_square())
    throw FormatError("to_block_sym: container holds a stack, not a matrix");
  BlockSym A(c.header.n, c.header.d);
  if (c.header.kind == "observation") A.kind = MatrixKind::observation;
  else if (c.header.kind == "noise") A.kind = MatrixKind::noise;
  else if (c.header.kind == "leave_one_out") A.kind = MatrixKind::leave_one_out;
  A.loo_block = c.header.m;
  A.data = c.payload;
  return A;
}

OrthoStack to_stack(const Container& c) {
  if (c.header.is_square())
    throw FormatError("to_stack: container holds a matrix, not a stack");
  OrthoStack S(c.header.n, c.header.d);
  S.data = c.payload;
  return S;
}

}  // namespace osync
