#include "lcns/io.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "lcns/errors.hpp"

namespace lcns::io {

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.17g}", x);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

void dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        dump(v, indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no literal for non-finite numbers.
      out += std::isfinite(x) ? fmt17(x) : Json(fmt17(x)).dump();
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  out += "\n";
  return out;
}

Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("InvariantFailed", "SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

const std::string& write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open output file " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("cannot write output file " + path.string());
  return bytes;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lcns::io
