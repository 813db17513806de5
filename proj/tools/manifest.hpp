#pragma once

// Run manifests: what was run, with which configuration and seed, on which
// inputs (SHA-256 of their bytes) and what it wrote.

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rope/error.hpp"
#include "rope/version.hpp"

namespace rope::cli {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error(ErrorKind::InternalState, "cannot initialise SHA-256");
  }

  void update(std::string_view bytes) {
    if (EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()) != 1)
      throw Error(ErrorKind::InternalState, "SHA-256 update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int size = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &size) != 1)
      throw Error(ErrorKind::InternalState, "SHA-256 finalisation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < size; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  Sha256 hash;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    hash.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return hash.hex();
}

class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv, std::uint64_t seed) {
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
    doc_["version"] = std::string(kVersion);
    doc_["seed"] = seed;
    doc_["config"] = nlohmann::json::object();
    doc_["inputs"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::array();
  }

  nlohmann::json& config() { return doc_["config"]; }
  nlohmann::json& extra(const std::string& key) { return doc_[key]; }

  void add_input(const std::string& role, const std::string& path) {
    doc_["inputs"][role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  // For stdin, the digest covers the lines read, each followed by '\n'.
  void add_stream_input(const std::string& role, std::string digest) {
    doc_["inputs"][role] = {{"path", "-"}, {"sha256_lines", std::move(digest)}};
  }
  void add_output(const std::string& path) { doc_["outputs"].push_back(path); }

  void write(std::ostream& out) const { out << doc_.dump(2) << '\n'; }

  void write(const std::filesystem::path& path) {
    add_output(path.string());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    write(out);
  }

 private:
  nlohmann::json doc_;
};

}  // namespace rope::cli
