#include "boxqp/instance_io.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "boxqp/error.hpp"

namespace boxqp {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_real(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(line, "invalid real '" + std::string(token) + "'");
  return value;
}

std::uint64_t parse_uint(std::string_view token, std::size_t line) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(line, "invalid integer '" + std::string(token) + "'");
  return value;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-blank line, or false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

 private:
  std::istringstream in_;
  std::size_t number_ = 0;
};

Vector read_row(LineReader& reader, std::size_t n, const std::string& section) {
  std::string line;
  if (!reader.next(line)) throw ParseError(reader.number() + 1, "missing " + section + " line");
  const auto tokens = split_ws(line);
  if (tokens.size() != n) {
    throw ParseError(reader.number(), section + ": expected " + std::to_string(n) + " values, got " +
                                          std::to_string(tokens.size()));
  }
  Vector row(n);
  for (std::size_t i = 0; i < n; ++i) row[i] = parse_real(tokens[i], reader.number());
  return row;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_instance(const BoxQPInstance& inst) {
  const std::size_t n = inst.n();
  std::string out = "BOXQP 1\n";
  out += "N " + std::to_string(n);
  if (const auto& origin = inst.origin()) {
    out += " DENSITY " + format_real(origin->density) + " SEED " + std::to_string(origin->seed);
  } else {
    out += " DENSITY - SEED -";
  }
  out += '\n';
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ' ';
      out += format_real(row[j]);
    }
    out += '\n';
  };
  for (std::size_t i = 0; i < n; ++i) write_row(inst.q_row(i));
  write_row(inst.v());
  write_row(inst.lower());
  write_row(inst.upper());
  if (inst.known_optimum()) out += "OPT " + format_real(*inst.known_optimum()) + '\n';
  return out;
}

BoxQPInstance parse_instance(const std::string& text) {
  LineReader reader(text);
  std::string line;
  if (!reader.next(line)) throw ParseError(1, "empty instance file");
  {
    const auto tokens = split_ws(line);
    if (tokens.size() != 2 || tokens[0] != "BOXQP")
      throw ParseError(reader.number(), "expected header 'BOXQP 1'");
    if (tokens[1] != "1")
      throw ParseError(reader.number(), "unsupported format version " + std::string(tokens[1]));
  }
  if (!reader.next(line)) throw ParseError(reader.number() + 1, "missing size line");
  const auto tokens = split_ws(line);
  if (tokens.size() != 6 || tokens[0] != "N" || tokens[2] != "DENSITY" || tokens[4] != "SEED")
    throw ParseError(reader.number(), "expected 'N <n> DENSITY <d> SEED <s>'");
  const std::size_t size_line = reader.number();
  const std::size_t n = parse_uint(tokens[1], size_line);
  if (n == 0) throw ParseError(size_line, "N must be positive");
  std::optional<double> density;
  std::optional<std::uint64_t> seed;
  if (tokens[3] != "-") density = parse_real(tokens[3], size_line);
  if (tokens[5] != "-") seed = parse_uint(tokens[5], size_line);

  Vector q;
  q.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = read_row(reader, n, "Q row " + std::to_string(i + 1));
    q.insert(q.end(), row.begin(), row.end());
  }
  Vector v = read_row(reader, n, "V");
  Vector lower = read_row(reader, n, "lower bounds");
  Vector upper = read_row(reader, n, "upper bounds");

  std::optional<double> optimum;
  if (reader.next(line)) {
    const auto opt = split_ws(line);
    if (opt.size() != 2 || opt[0] != "OPT")
      throw ParseError(reader.number(), "expected 'OPT <value>' or end of file");
    optimum = parse_real(opt[1], reader.number());
    if (reader.next(line)) throw ParseError(reader.number(), "unexpected trailing content");
  }

  std::optional<GeneratorSpec> origin;
  if (density && seed) origin = GeneratorSpec{n, *density, *seed};
  return BoxQPInstance(n, std::move(q), std::move(v), std::move(lower), std::move(upper), origin,
                       optimum);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

void save_instance(const BoxQPInstance& inst, const std::filesystem::path& path) {
  write_file_atomic(path, format_instance(inst));
}

BoxQPInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

}  // namespace boxqp
