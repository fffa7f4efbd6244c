/*
 Copyright 2026 The mjls Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "mjls/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mjls/errors.hpp"

namespace mjls
{
    namespace
    {
        double parse_cell(const std::string &cell, std::size_t line)
        {
            if (cell == "inf")
            {
                return std::numeric_limits<double>::infinity();
            }
            if (cell == "-inf")
            {
                return -std::numeric_limits<double>::infinity();
            }
            if (cell == "nan")
            {
                return std::numeric_limits<double>::quiet_NaN();
            }
            double v = 0.0;
            const char *first = cell.data();
            const char *last = first + cell.size();
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || cell.empty())
            {
                throw InvalidArgument("trace CSV line " + std::to_string(line) + ": non-numeric cell '" + cell + "'");
            }
            return v;
        }

        double at_or_last(const OptimizationTrace &t, std::size_t i, double TraceRow::*field)
        {
            return t.rows[std::min(i, t.rows.size() - 1)].*field;
        }
    } // namespace

    std::string format_double(double v)
    {
        if (std::isnan(v))
        {
            return "nan";
        }
        if (std::isinf(v))
        {
            return v > 0 ? "inf" : "-inf";
        }
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    }

    void write_trace_csv(std::ostream &out, const OptimizationTrace &trace)
    {
        out << kTraceHeader << '\n';
        for (const auto &r : trace.rows)
        {
            out << r.iteration << ',' << format_double(r.cost) << ',' << format_double(r.normalized_gap) << ','
                << format_double(r.grad_norm) << ',' << format_double(r.step_norm) << ','
                << format_double(r.wall_time_s) << ',' << format_double(r.diverged_count) << '\n';
        }
    }

    void write_trace_csv(const std::filesystem::path &path, const OptimizationTrace &trace)
    {
        std::ostringstream buf;
        write_trace_csv(buf, trace);
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw InvalidArgument("cannot write " + path.string());
        }
        out << buf.str();
    }

    OptimizationTrace read_trace_csv(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line) || line != kTraceHeader)
        {
            throw InvalidArgument("trace CSV: missing or unexpected header");
        }
        OptimizationTrace trace;
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
            {
                continue;
            }
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
            {
                cells.push_back(cell);
            }
            if (cells.size() != 7)
            {
                throw InvalidArgument("trace CSV line " + std::to_string(line_no) + ": expected 7 columns");
            }
            const double it = parse_cell(cells[0], line_no);
            if (!(it >= 0.0) || it != std::floor(it))
            {
                throw InvalidArgument("trace CSV line " + std::to_string(line_no) + ": bad iteration");
            }
            trace.rows.push_back({static_cast<std::size_t>(it), parse_cell(cells[1], line_no),
                                  parse_cell(cells[2], line_no), parse_cell(cells[3], line_no),
                                  parse_cell(cells[4], line_no), parse_cell(cells[5], line_no),
                                  parse_cell(cells[6], line_no)});
        }
        return trace;
    }

    OptimizationTrace read_trace_csv(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw InvalidArgument("cannot open " + path.string());
        }
        return read_trace_csv(in);
    }

    OptimizationTrace mean_trace(const std::vector<OptimizationTrace> &traces)
    {
        if (traces.empty())
        {
            throw InvalidArgument("mean_trace needs at least one trace");
        }
        std::size_t length = 0;
        for (const auto &t : traces)
        {
            if (t.rows.empty())
            {
                throw InvalidArgument("mean_trace: empty trace");
            }
            length = std::max(length, t.rows.size());
        }
        const double n = static_cast<double>(traces.size());
        OptimizationTrace mean;
        mean.rows.resize(length);
        for (std::size_t i = 0; i < length; ++i)
        {
            TraceRow &row = mean.rows[i];
            row.iteration = i;
            for (double TraceRow::*field : {&TraceRow::cost, &TraceRow::normalized_gap, &TraceRow::grad_norm,
                                            &TraceRow::step_norm, &TraceRow::wall_time_s, &TraceRow::diverged_count})
            {
                double sum = 0.0;
                for (const auto &t : traces)
                {
                    sum += at_or_last(t, i, field);
                }
                row.*field = sum / n;
            }
        }
        return mean;
    }

} // namespace mjls
