// SPDX-License-Identifier: Apache-2.0
//
// uavris: joint transmission, compression and trajectory design for
// wireless-powered crowdsensing with a UAV-mounted reflecting surface.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace uavris {

// Comma-separated table with a fixed header, '.' decimals and LF line endings.
class CsvTable
{
  public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != header_.size())
            throw std::invalid_argument("csv row has " + std::to_string(row.size()) + " cells, header has " +
                                        std::to_string(header_.size()));
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string> &header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    const std::vector<Cell> &row(std::size_t i) const { return rows_.at(i); }

    double number(std::size_t r, const std::string &column) const
    {
        const auto &cell = rows_.at(r).at(index_of(column));
        if (const auto *d = std::get_if<double>(&cell)) return *d;
        if (const auto *i = std::get_if<long long>(&cell)) return static_cast<double>(*i);
        throw std::invalid_argument("csv column '" + column + "' is not numeric");
    }

    std::size_t index_of(const std::string &column) const
    {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == column) return i;
        throw std::out_of_range("csv column '" + column + "' not found");
    }

    std::string str() const
    {
        std::string out;
        append_line(out, header_);
        for (const auto &r : rows_)
        {
            std::vector<std::string> cells;
            cells.reserve(r.size());
            for (const auto &c : r) cells.push_back(format(c));
            append_line(out, cells);
        }
        return out;
    }

    void write(const std::string &path) const
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + path + "'");
        f << str();
    }

    static std::string format(const Cell &c)
    {
        if (const auto *s = std::get_if<std::string>(&c)) return *s;
        if (const auto *i = std::get_if<long long>(&c)) return std::to_string(*i);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", std::get<double>(c));
        return buf;
    }

  private:
    static void append_line(std::string &out, const std::vector<std::string> &cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

} // namespace uavris
