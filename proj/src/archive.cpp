// Copyright 2026 The fasa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fasa/archive.hpp"

#include <cstring>
#include <fstream>

#include "fasa/error.hpp"

namespace fasa {
namespace {

constexpr char kMagic[8] = {'F', 'A', 'S', 'A', 'A', 'R', 'C', '1'};

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_i64(std::ostream& os, std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}
  void read(void* dst, std::size_t n) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!is_) throw IoError(path_ + ": truncated archive");
  }
  std::uint32_t u32() {
    std::uint32_t v;
    read(&v, 4);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    read(&v, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 24)) throw IoError(path_ + ": corrupt string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

 private:
  std::istream& is_;
  std::string path_;
};

}  // namespace

template <typename S>
void TensorArchive::put(const std::string& name, const Tensor<S>& t) {
  Entry e;
  e.width = sizeof(S);
  e.shape = t.shape();
  e.bytes.resize(sizeof(S) * static_cast<std::size_t>(t.size()));
  if (t.size()) std::memcpy(e.bytes.data(), t.data(), e.bytes.size());
  tensors_[name] = std::move(e);
}

template <typename S>
Tensor<S> TensorArchive::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ValidationError("archive has no tensor named '" + name + "'");
  const Entry& e = it->second;
  Tensor<S> t(e.shape);
  const Index n = e.shape.numel();
  if (e.width == sizeof(S)) {
    if (n) std::memcpy(t.data(), e.bytes.data(), e.bytes.size());
  } else if (e.width == 4) {
    const auto* src = reinterpret_cast<const float*>(e.bytes.data());
    for (Index i = 0; i < n; ++i) t[i] = static_cast<S>(src[i]);
  } else {
    const auto* src = reinterpret_cast<const double*>(e.bytes.data());
    for (Index i = 0; i < n; ++i) t[i] = static_cast<S>(src[i]);
  }
  return t;
}

std::vector<std::string> TensorArchive::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : tensors_) out.push_back(k);
  return out;
}

const std::string& TensorArchive::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw ValidationError("archive has no metadata key '" + key + "'");
  return it->second;
}

void TensorArchive::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path + ": cannot open for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<std::uint32_t>(meta_.size()));
  for (const auto& [k, v] : meta_) {
    write_str(os, k);
    write_str(os, v);
  }
  write_u32(os, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, e] : tensors_) {
    write_str(os, name);
    os.put(static_cast<char>(e.width));
    write_u32(os, static_cast<std::uint32_t>(e.shape.rank()));
    for (Index d : e.shape.dims()) write_i64(os, d);
    os.write(e.bytes.data(), static_cast<std::streamsize>(e.bytes.size()));
  }
  if (!os) throw IoError(path + ": write failed");
}

TensorArchive TensorArchive::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open for reading");
  Reader rd(is, path);
  char magic[8];
  rd.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw IoError(path + ": not a fasa tensor archive");
  TensorArchive a;
  const std::uint32_t nmeta = rd.u32();
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = rd.str();
    a.meta_[k] = rd.str();
  }
  const std::uint32_t count = rd.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = rd.str();
    Entry e;
    std::uint8_t width;
    rd.read(&width, 1);
    if (width != 4 && width != 8) throw IoError(path + ": bad scalar width for " + name);
    e.width = width;
    const std::uint32_t rank = rd.u32();
    if (rank > 8) throw IoError(path + ": bad rank for " + name);
    std::vector<Index> dims(rank);
    for (auto& d : dims) {
      d = rd.i64();
      if (d < 0) throw IoError(path + ": negative dimension for " + name);
    }
    e.shape = Shape(dims);
    e.bytes.resize(static_cast<std::size_t>(e.shape.numel()) * width);
    rd.read(e.bytes.data(), e.bytes.size());
    a.tensors_[name] = std::move(e);
  }
  return a;
}

template void TensorArchive::put<float>(const std::string&, const Tensor<float>&);
template void TensorArchive::put<double>(const std::string&, const Tensor<double>&);
template Tensor<float> TensorArchive::get<float>(const std::string&) const;
template Tensor<double> TensorArchive::get<double>(const std::string&) const;

}  // namespace fasa
