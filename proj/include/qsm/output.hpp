// Copyright 2026 The qsmlab Authors
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qsm {

/// %.17g, enough digits to round-trip any double.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

/// In-memory CSV; cells are preformatted strings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::size_t n_rows() const noexcept { return rows_.size(); }
    const std::vector<std::string>& header() const noexcept { return header_; }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct FileEntry {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
};

/// Writes files below one directory and remembers their hashes.
class OutputSink {
public:
    explicit OutputSink(std::filesystem::path dir);
    const std::filesystem::path& dir() const noexcept { return dir_; }
    void write(const std::string& name, const std::string& content);
    void write(const std::string& name, const CsvTable& table) { write(name, table.str()); }
    void write(const std::string& name, const nlohmann::json& doc) { write(name, doc.dump(2) + "\n"); }
    const std::vector<FileEntry>& files() const noexcept { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<FileEntry> files_;
};

std::string read_text(const std::filesystem::path& path);

}  // namespace qsm
