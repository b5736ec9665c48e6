#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

#include "lcns/types.hpp"

namespace lcns::io {

using Json = nlohmann::ordered_json;

// Shortest form that still carries 17 significant digits; integral values keep a trailing ".0".
std::string fmt17(double x);

// Deterministic serialisation: keys in insertion order, every double through fmt17.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(cplx z);  // [re, im]

std::string sha256_hex(const std::string& bytes);

// Writes the bytes and returns them, so the caller can hash exactly what landed on disk.
const std::string& write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

// Runs body(i) for i in [0, n) on up to `threads` worker threads; exceptions are rethrown in index order.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace lcns::io
