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

#include "usinv/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace usinv {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + where + "' is not a number: '" + text + "'");
  }
  if (trim(text.substr(pos)).size() > 0)
    throw std::invalid_argument("config: '" + where + "' has trailing junk: '" + text + "'");
  return v;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_text(buf.str(), path);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const char* what) {
      std::ostringstream os;
      os << "config: " << origin << ":" << line_no << ": " << what;
      throw std::invalid_argument(os.str());
    };

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key outside any section");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  sections_[section][key] = trim(value);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto sit = sections_.find(section);
  return sit != sections_.end() && sit->second.count(key) > 0;
}

void Config::check_known(const std::map<std::string, std::set<std::string>>& schema) const {
  std::vector<std::string> unknown;
  for (const auto& [section, keys] : sections_) {
    const auto sit = schema.find(section);
    if (sit == schema.end()) {
      unknown.push_back("[" + section + "]");
      continue;
    }
    for (const auto& [key, value] : keys)
      if (sit->second.count(key) == 0) unknown.push_back(section + "." + key);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const std::string& u : unknown) msg += " " + u;
    throw std::invalid_argument(msg);
  }
}

void Config::record(const std::string& section, const std::string& key,
                    const std::string& value) const {
  resolved_[section + "." + key] = value;
}

std::string Config::lookup(const std::string& section, const std::string& key,
                           const std::string& fallback_repr, bool* found) const {
  const auto sit = sections_.find(section);
  if (sit != sections_.end()) {
    const auto kit = sit->second.find(key);
    if (kit != sit->second.end()) {
      *found = true;
      record(section, key, kit->second);
      return kit->second;
    }
  }
  *found = false;
  record(section, key, fallback_repr);
  return fallback_repr;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  std::ostringstream repr;
  repr.precision(17);
  repr << fallback;
  bool found = false;
  const std::string text = lookup(section, key, repr.str(), &found);
  return found ? parse_double(text, section + "." + key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
  bool found = false;
  const std::string text = lookup(section, key, std::to_string(fallback), &found);
  if (!found) return fallback;
  const double v = parse_double(text, section + "." + key);
  const int i = int(v);
  if (double(i) != v)
    throw std::invalid_argument("config: '" + section + "." + key +
                                "' must be an integer: '" + text + "'");
  return i;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  bool found = false;
  const std::string text = lookup(section, key, fallback ? "true" : "false", &found);
  if (!found) return fallback;
  const std::string t = lower(text);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw std::invalid_argument("config: '" + section + "." + key +
                              "' is not a boolean: '" + text + "'");
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  bool found = false;
  return lookup(section, key, fallback, &found);
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  std::ostringstream repr;
  repr.precision(17);
  for (std::size_t i = 0; i < fallback.size(); ++i) repr << (i ? " " : "") << fallback[i];
  bool found = false;
  const std::string text = lookup(section, key, repr.str(), &found);
  if (!found) return fallback;
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(tok, section + "." + key));
  return out;
}

std::string Config::resolved_text() const {
  std::ostringstream os;
  for (const auto& [key, value] : resolved_) os << key << " = " << value << "\n";
  return os.str();
}

}  // namespace usinv
