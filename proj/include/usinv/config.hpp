/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The usinv authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace usinv {

/**
 * INI-style run configuration. Sections group keys per pipeline stage;
 * '#' and ';' start comments; values are free text until end of line.
 *
 * Lookups take a default so a missing key never aborts a run, but a key
 * that no stage knows about is a hard error at schema-check time, which
 * catches typos before any compute starts. Every lookup records the value
 * actually used; `resolved_text` dumps that record so a run can archive
 * the exact configuration it executed with.
 */
class Config {
 public:
  Config() = default;

  /// Parses a file. Throws std::invalid_argument on syntax errors.
  static Config from_file(const std::string& path);
  /// Parses in-memory text; `origin` labels error messages.
  static Config from_text(const std::string& text, const std::string& origin = "<text>");

  /// Inserts or replaces a value, as from a command line override.
  void set(const std::string& section, const std::string& key, const std::string& value);

  bool has(const std::string& section, const std::string& key) const;

  /// Throws std::invalid_argument listing every key not present in `schema`.
  void check_known(const std::map<std::string, std::set<std::string>>& schema) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  /// Whitespace-separated list of numbers.
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;

  /// Every value handed out so far, one "section.key = value" per line,
  /// sorted, defaults included.
  std::string resolved_text() const;

 private:
  std::string lookup(const std::string& section, const std::string& key,
                     const std::string& fallback_repr, bool* found) const;
  void record(const std::string& section, const std::string& key,
              const std::string& value) const;

  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace usinv
