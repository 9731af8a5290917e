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

#ifndef FASA_ARCHIVE_HPP_
#define FASA_ARCHIVE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fasa/tensor.hpp"

namespace fasa {

/// Named tensors plus string metadata in one binary file (layout in
/// docs/file_formats.md). Tensors keep their scalar width, so a float
/// tensor written and read back as float is bit-identical.
class TensorArchive {
 public:
  template <typename S>
  void put(const std::string& name, const Tensor<S>& t);

  template <typename S>
  Tensor<S> get(const std::string& name) const;

  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }
  std::vector<std::string> names() const;

  void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }
  const std::string& meta(const std::string& key) const;
  bool has_meta(const std::string& key) const { return meta_.count(key) > 0; }
  const std::map<std::string, std::string>& all_meta() const { return meta_; }

  void save(const std::string& path) const;
  static TensorArchive load(const std::string& path);

 private:
  struct Entry {
    std::uint8_t width = 8;  // bytes per scalar: 4 or 8
    Shape shape;
    std::vector<char> bytes;
  };
  std::map<std::string, std::string> meta_;
  std::map<std::string, Entry> tensors_;
};

}  // namespace fasa

#endif  // FASA_ARCHIVE_HPP_
