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

#include "mjls/serialization.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mjls/errors.hpp"

namespace mjls
{
    namespace
    {
        using json = nlohmann::ordered_json;

        json matrix_to_json(const Matrix &m)
        {
            json rows = json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r)
            {
                json row = json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                {
                    row.push_back(m(r, c));
                }
                rows.push_back(std::move(row));
            }
            return rows;
        }

        json modes_to_json(const ModeMatrices &ms)
        {
            json out = json::array();
            for (const auto &m : ms)
            {
                out.push_back(matrix_to_json(m));
            }
            return out;
        }

        double number_at(const json &j, const std::string &where)
        {
            if (!j.is_number())
            {
                throw InvalidArgument(where + ": expected a number");
            }
            return j.get<double>();
        }

        Matrix matrix_from_json(const json &j, Eigen::Index rows, Eigen::Index cols, const std::string &where)
        {
            if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
            {
                throw InvalidArgument(where + ": expected " + std::to_string(rows) + " rows");
            }
            Matrix m(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
            {
                const json &row = j[static_cast<std::size_t>(r)];
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
                {
                    throw InvalidArgument(where + ": row " + std::to_string(r) + " must have " + std::to_string(cols) +
                                          " entries");
                }
                for (Eigen::Index c = 0; c < cols; ++c)
                {
                    m(r, c) = number_at(row[static_cast<std::size_t>(c)], where);
                }
            }
            return m;
        }

        ModeMatrices modes_from_json(const json &doc, const char *key, int ns, Eigen::Index rows, Eigen::Index cols)
        {
            if (!doc.contains(key))
            {
                throw InvalidArgument(std::string("model JSON: missing \"") + key + "\"");
            }
            const json &j = doc.at(key);
            if (!j.is_array() || static_cast<int>(j.size()) != ns)
            {
                throw InvalidArgument(std::string("model JSON: \"") + key + "\" must hold " + std::to_string(ns) +
                                      " matrices");
            }
            ModeMatrices out;
            for (int i = 0; i < ns; ++i)
            {
                out.push_back(matrix_from_json(j[static_cast<std::size_t>(i)], rows, cols,
                                               std::string(key) + "[" + std::to_string(i) + "]"));
            }
            return out;
        }

        int positive_int(const json &doc, const char *key)
        {
            if (!doc.contains(key) || !doc.at(key).is_number_integer() || doc.at(key).get<long long>() < 1)
            {
                throw InvalidArgument(std::string("model JSON: \"") + key + "\" must be a positive integer");
            }
            return static_cast<int>(doc.at(key).get<long long>());
        }

        json parse(const std::string &text)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::parse_error &e)
            {
                throw InvalidArgument(std::string("malformed JSON: ") + e.what());
            }
        }

        std::string read_file(const std::filesystem::path &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
            {
                throw InvalidArgument("cannot open " + path.string());
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            return buf.str();
        }
    } // namespace

    std::string model_to_json(const JumpLinearModel &model, int indent)
    {
        json doc = json::object();
        doc["Ns"] = model.num_modes();
        doc["d"] = model.state_dim();
        doc["k"] = model.input_dim();
        doc["A"] = modes_to_json(model.A);
        doc["B"] = modes_to_json(model.B);
        doc["Q"] = modes_to_json(model.Q);
        doc["R"] = modes_to_json(model.R);
        doc["P"] = matrix_to_json(model.transitions);
        json pi0 = json::array();
        for (Eigen::Index i = 0; i < model.initial_modes.size(); ++i)
        {
            pi0.push_back(model.initial_modes(i));
        }
        doc["pi0"] = std::move(pi0);
        doc["Sigma0"] = matrix_to_json(model.initial_state.covariance);
        doc["L"] = model.initial_state.norm_bound;
        return doc.dump(indent);
    }

    JumpLinearModel model_from_json(const std::string &text)
    {
        const json doc = parse(text);
        if (!doc.is_object())
        {
            throw InvalidArgument("model JSON: top level must be an object");
        }
        const int ns = positive_int(doc, "Ns");
        const int d = positive_int(doc, "d");
        const int k = positive_int(doc, "k");

        JumpLinearModel model;
        model.A = modes_from_json(doc, "A", ns, d, d);
        model.B = modes_from_json(doc, "B", ns, d, k);
        model.Q = modes_from_json(doc, "Q", ns, d, d);
        model.R = modes_from_json(doc, "R", ns, k, k);
        if (!doc.contains("P") || !doc.contains("pi0") || !doc.contains("Sigma0"))
        {
            throw InvalidArgument("model JSON: \"P\", \"pi0\" and \"Sigma0\" are required");
        }
        model.transitions = matrix_from_json(doc.at("P"), ns, ns, "P");
        const json &pi0 = doc.at("pi0");
        if (!pi0.is_array() || static_cast<int>(pi0.size()) != ns)
        {
            throw InvalidArgument("model JSON: \"pi0\" must have Ns entries");
        }
        model.initial_modes.resize(ns);
        for (int i = 0; i < ns; ++i)
        {
            model.initial_modes(i) = number_at(pi0[static_cast<std::size_t>(i)], "pi0");
        }
        model.initial_state.covariance = matrix_from_json(doc.at("Sigma0"), d, d, "Sigma0");
        model.initial_state.norm_bound = doc.contains("L")
                                             ? number_at(doc.at("L"), "L")
                                             : InitialStateDistribution::default_norm_bound(
                                                   model.initial_state.covariance);
        model.validate();
        return model;
    }

    void save_model(const JumpLinearModel &model, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
        {
            throw InvalidArgument("cannot write " + path.string());
        }
        out << model_to_json(model) << '\n';
    }

    JumpLinearModel load_model(const std::filesystem::path &path)
    {
        return model_from_json(read_file(path));
    }

    std::string policy_to_json(const GainSchedule &policy, int indent)
    {
        json doc = json::object();
        doc["K"] = modes_to_json(policy.gains);
        return doc.dump(indent);
    }

    GainSchedule policy_from_json(const std::string &text)
    {
        const json doc = parse(text);
        if (!doc.is_object() || !doc.contains("K") || !doc.at("K").is_array() || doc.at("K").empty())
        {
            throw InvalidArgument("policy JSON: expected {\"K\": [matrix, ...]}");
        }
        GainSchedule policy;
        for (const auto &m : doc.at("K"))
        {
            if (!m.is_array() || m.empty() || !m.front().is_array())
            {
                throw InvalidArgument("policy JSON: each gain must be an array of rows");
            }
            const auto rows = static_cast<Eigen::Index>(m.size());
            const auto cols = static_cast<Eigen::Index>(m.front().size());
            policy.gains.push_back(matrix_from_json(m, rows, cols, "K"));
        }
        return policy;
    }

} // namespace mjls
