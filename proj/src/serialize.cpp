#include "qdarwin/serialize.hpp"

#include "qdarwin/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>

namespace qdarwin {

namespace {

constexpr char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = bytes[i] << 16;
    if (i + 1 < bytes.size()) chunk |= bytes[i + 1] << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out += kBase64Chars[(chunk >> 18) & 0x3f];
    out += kBase64Chars[(chunk >> 12) & 0x3f];
    out += (i + 1 < bytes.size()) ? kBase64Chars[(chunk >> 6) & 0x3f] : '=';
    out += (i + 2 < bytes.size()) ? kBase64Chars[chunk & 0x3f] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t chunk = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = value_of(c);
    if (v < 0) throw ConfigError("base64: invalid character");
    chunk = (chunk << 6) | static_cast<std::uint32_t>(v);
    if (++have == 4) {
      out.push_back((chunk >> 16) & 0xff);
      out.push_back((chunk >> 8) & 0xff);
      out.push_back(chunk & 0xff);
      have = 0;
      chunk = 0;
    }
  }
  if (have == 2) {
    out.push_back((chunk >> 4) & 0xff);
  } else if (have == 3) {
    out.push_back((chunk >> 10) & 0xff);
    out.push_back((chunk >> 2) & 0xff);
  } else if (have == 1) {
    throw ConfigError("base64: truncated input");
  }
  return out;
}

void append_le_double(std::vector<std::uint8_t>& bytes, double v) {
  std::uint64_t raw = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) bytes.push_back((raw >> (8 * b)) & 0xff);
}

double read_le_double(const std::vector<std::uint8_t>& bytes, size_t offset) {
  std::uint64_t raw = 0;
  for (int b = 7; b >= 0; --b) raw = (raw << 8) | bytes[offset + b];
  return std::bit_cast<double>(raw);
}

}  // namespace

std::string encode_matrix(const Matrix& m) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<size_t>(m.size()) * 16);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      append_le_double(bytes, m(i, j).real());
      append_le_double(bytes, m(i, j).imag());
    }
  }
  return base64_encode(bytes);
}

Matrix decode_matrix(const std::string& blob, long rows, long cols) {
  const std::vector<std::uint8_t> bytes = base64_decode(blob);
  if (bytes.size() != static_cast<size_t>(rows) * cols * 16) {
    throw ConfigError("decode_matrix: byte count does not match declared shape");
  }
  Matrix m(rows, cols);
  size_t offset = 0;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      const double re = read_le_double(bytes, offset);
      const double im = read_le_double(bytes, offset + 8);
      m(i, j) = Complex(re, im);
      offset += 16;
    }
  }
  return m;
}

Json povm_to_json(const Povm& p) {
  Json j;
  j["support"] = p.support;
  j["local_dims"] = p.local_dims;
  j["labels"] = p.labels;
  j["dim"] = p.local_dim();
  Json effects = Json::array();
  for (const Matrix& e : p.effects) effects.push_back(encode_matrix(e));
  j["effects"] = std::move(effects);
  return j;
}

Povm povm_from_json(const Json& j) {
  const auto support = j.at("support").get<std::vector<int>>();
  const auto dims = j.at("local_dims").get<std::vector<int>>();
  const auto labels = j.at("labels").get<std::vector<std::string>>();
  const long d = j.at("dim").get<long>();
  std::vector<Matrix> effects;
  for (const auto& blob : j.at("effects")) {
    effects.push_back(decode_matrix(blob.get<std::string>(), d, d));
  }
  return Povm(support, dims, labels, effects);
}

Json partition_to_json(const Partition& p) {
  Json j;
  j["n_sites"] = p.n_sites;
  j["blocks"] = p.blocks;
  j["complete"] = p.complete();
  return j;
}

Partition partition_from_json(const Json& j) {
  return Partition(j.at("n_sites").get<int>(),
                   j.at("blocks").get<std::vector<std::vector<int>>>());
}

Json channel_to_json(const Channel& ch) {
  Json j;
  j["input_dim"] = ch.input_dim;
  j["site_dims"] = ch.output_space.site_dims();
  Json kraus = Json::array();
  for (const Matrix& k : ch.kraus) kraus.push_back(encode_matrix(k));
  j["kraus"] = std::move(kraus);
  return j;
}

Channel channel_from_json(const Json& j) {
  const int d_in = j.at("input_dim").get<int>();
  const SiteSpace space(j.at("site_dims").get<std::vector<int>>());
  std::vector<Matrix> kraus;
  for (const auto& blob : j.at("kraus")) {
    kraus.push_back(decode_matrix(blob.get<std::string>(), space.total_dim(), d_in));
  }
  return Channel(d_in, space, kraus);
}

Json witness_to_json(const JmWitness& w) {
  Json j;
  j["parent"] = povm_to_json(w.parent);
  Json tables = Json::array();
  for (const auto& table : w.conditionals) {
    Json rows = Json::array();
    for (long r = 0; r < table.rows(); ++r) {
      Json row = Json::array();
      for (long c = 0; c < table.cols(); ++c) row.push_back(table(r, c));
      rows.push_back(std::move(row));
    }
    tables.push_back(std::move(rows));
  }
  j["conditionals"] = std::move(tables);
  j["residual"] = w.residual;
  return j;
}

JmWitness witness_from_json(const Json& j) {
  JmWitness w;
  w.parent = povm_from_json(j.at("parent"));
  for (const auto& rows : j.at("conditionals")) {
    Eigen::MatrixXd table(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t r = 0; r < rows.size(); ++r) {
      for (size_t c = 0; c < rows[r].size(); ++c) table(r, c) = rows[r][c].get<double>();
    }
    w.conditionals.push_back(std::move(table));
  }
  w.residual = j.at("residual").get<double>();
  return w;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace qdarwin
