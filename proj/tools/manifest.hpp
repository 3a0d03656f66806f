// Copyright 2026 The fmqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "fmqa/bits.hpp"

namespace fmqa::cli {

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open '" + path + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, "EVP_MD_CTX_new failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

/// Everything needed to rerun a command: argv, effective configuration, input
/// digests. Written next to each output as `<output>.manifest.json`.
class RunManifest {
 public:
  RunManifest(std::string command, int argc, char** argv) {
    doc_["tool"] = "fmqa";
    doc_["version"] = FMQA_VERSION;
    doc_["command"] = std::move(command);
    doc_["argv"] = std::vector<std::string>(argv, argv + argc);
    doc_["started_utc"] = utc_now();
    doc_["inputs"] = nlohmann::json::array();
    doc_["outputs"] = nlohmann::json::array();
  }

  nlohmann::json& config() { return doc_["config"]; }

  void add_input(const std::string& role, const std::string& path) {
    doc_["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }

  void add_output(const std::string& role, const std::string& path) {
    doc_["outputs"].push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }

  void write(const std::string& output_path) {
    doc_["finished_utc"] = utc_now();
    const std::string path = output_path + ".manifest.json";
    std::ofstream out(path);
    require(static_cast<bool>(out), "cannot write manifest '" + path + "'");
    out << doc_.dump(2) << '\n';
  }

 private:
  nlohmann::json doc_;
};

}  // namespace fmqa::cli
