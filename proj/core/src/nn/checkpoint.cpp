// Copyright 2026 The dyncomm Authors. All rights reserved.
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
#include "dyncomm/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace dyncomm::nn {
namespace {

constexpr char kMagic[4] = {'D', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint truncated");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_str(std::istream& is, std::uint32_t n) {
  std::string s(n, '\0');
  if (n && !is.read(s.data(), n)) throw std::runtime_error("checkpoint truncated");
  return s;
}

std::ifstream open_and_check(const std::filesystem::path& path, std::string* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
  *meta = get_str(is, get_u32(is));
  return is;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedSet>& sets,
                     const std::string& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(meta.size()));
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  std::uint32_t count = 0;
  for (const auto& s : sets) count += static_cast<std::uint32_t>(s.params->size());
  put_u32(os, count);
  static_assert(sizeof(double) == 8);
  for (const auto& s : sets) {
    for (std::size_t i = 0; i < s.params->size(); ++i) {
      const Parameter& p = (*s.params)[i];
      const std::string name = s.prefix + p.name;
      put_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u32(os, static_cast<std::uint32_t>(p.value.rows()));
      put_u32(os, static_cast<std::uint32_t>(p.value.cols()));
      os.write(reinterpret_cast<const char*>(p.value.data()),
               static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string load_checkpoint(const std::filesystem::path& path, const std::vector<NamedSet>& sets) {
  std::string meta;
  std::ifstream is = open_and_check(path, &meta);
  const std::uint32_t count = get_u32(is);
  std::map<std::string, Matrix> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    std::string name = get_str(is, get_u32(is));
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    Matrix m(rows, cols);
    if (m.size() && !is.read(reinterpret_cast<char*>(m.data()),
                             static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw std::runtime_error("checkpoint truncated");
    }
    entries.emplace(std::move(name), std::move(m));
  }
  for (const auto& s : sets) {
    for (std::size_t i = 0; i < s.params->size(); ++i) {
      Parameter& p = (*s.params)[i];
      auto it = entries.find(s.prefix + p.name);
      if (it == entries.end()) {
        throw std::runtime_error("checkpoint missing parameter '" + s.prefix + p.name + "'");
      }
      if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
        throw DimensionError("checkpoint shape mismatch for '" + s.prefix + p.name + "'");
      }
      p.value = it->second;
    }
  }
  return meta;
}

std::string read_checkpoint_meta(const std::filesystem::path& path) {
  std::string meta;
  open_and_check(path, &meta);
  return meta;
}

}  // namespace dyncomm::nn
