#include "xlate/data.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace xlate {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    for (auto& s : cells) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
    }
    return cells;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Dataset make_dataset(Eigen::MatrixXd values, std::vector<SampleMeta> meta,
                     std::vector<std::string> variable_names) {
    if (static_cast<Eigen::Index>(meta.size()) != values.rows()) {
        throw DataError("row-count mismatch: " + std::to_string(values.rows()) + " value rows vs " +
                        std::to_string(meta.size()) + " meta rows");
    }
    if (static_cast<Eigen::Index>(variable_names.size()) != values.cols()) {
        throw DataError("variable name count does not match column count");
    }
    if (!values.allFinite()) throw DataError("non-finite value");

    Dataset d;
    d.values = std::move(values);
    d.meta = std::move(meta);
    d.variable_names = std::move(variable_names);
    d.standardization = Standardization::identity(d.values.cols());

    std::unordered_map<std::string, int> index_of;
    for (int r = 0; r < static_cast<int>(d.meta.size()); ++r) {
        const auto& m = d.meta[r];
        if (m.disease != 0 && m.disease != 1) {
            throw DataError("disease not in {0,1} for sample " + m.sample_id);
        }
        auto [it, inserted] = index_of.try_emplace(m.individual_id, static_cast<int>(d.individuals.size()));
        if (inserted) d.individuals.push_back({m.individual_id, m.disease, {}});
        auto& ind = d.individuals[it->second];
        if (ind.disease != m.disease) {
            throw DataError("disease label changes within individual " + m.individual_id);
        }
        ind.rows.push_back(r);
    }
    for (auto& ind : d.individuals) {
        std::sort(ind.rows.begin(), ind.rows.end(), [&](int a, int b) {
            return d.meta[a].time_index < d.meta[b].time_index;
        });
        for (std::size_t t = 0; t < ind.rows.size(); ++t) {
            if (d.meta[ind.rows[t]].time_index != static_cast<int>(t) + 1) {
                throw DataError("non-consecutive time index for individual " + ind.id);
            }
        }
    }
    return d;
}

Dataset standardized(const Dataset& raw) {
    Dataset out = raw;
    auto [values, transform] = standardize(raw.values);
    out.values = std::move(values);
    out.standardization = std::move(transform);
    return out;
}

Dataset load_dataset(const std::filesystem::path& values_path,
                     const std::filesystem::path& meta_path, const LoadOptions& options) {
    const auto vlines = read_lines(values_path);
    const auto mlines = read_lines(meta_path);
    if (vlines.empty()) throw DataError(where(values_path, 1) + "missing header");
    if (mlines.empty()) throw DataError(where(meta_path, 1) + "missing header");

    auto names = split_csv_line(vlines[0]);
    const auto p = names.size();
    const auto n = vlines.size() - 1;
    if (mlines.size() - 1 != n) {
        throw DataError("row-count mismatch: " + values_path.string() + " has " + std::to_string(n) +
                        " rows, " + meta_path.string() + " has " + std::to_string(mlines.size() - 1));
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < n; ++r) {
        const auto cells = split_csv_line(vlines[r + 1]);
        if (cells.size() != p) {
            throw DataError(where(values_path, r + 2) + "expected " + std::to_string(p) + " cells, got " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < p; ++c) {
            if (cells[c].empty()) throw DataError(where(values_path, r + 2) + "missing value in column " + names[c]);
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw DataError(where(values_path, r + 2) + "non-numeric cell '" + cells[c] + "' in column " +
                                names[c]);
            }
            if (options.log1p) {
                if (!(v > -1.0)) throw DataError(where(values_path, r + 2) + "log1p of value <= -1");
                v = std::log1p(v);
            }
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }

    const std::vector<std::string> expected{"sample_id", "individual_id", "time_index", "disease"};
    if (split_csv_line(mlines[0]) != expected) {
        throw DataError(where(meta_path, 1) + "header must be sample_id,individual_id,time_index,disease");
    }
    std::vector<SampleMeta> meta;
    meta.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto cells = split_csv_line(mlines[r + 1]);
        if (cells.size() != 4) throw DataError(where(meta_path, r + 2) + "expected 4 cells");
        SampleMeta m{cells[0], cells[1], 0, 0};
        if (!parse_int(cells[2], m.time_index)) {
            throw DataError(where(meta_path, r + 2) + "non-numeric time_index '" + cells[2] + "'");
        }
        if (!parse_int(cells[3], m.disease) || (m.disease != 0 && m.disease != 1)) {
            throw DataError(where(meta_path, r + 2) + "disease not in {0,1}: '" + cells[3] + "'");
        }
        meta.push_back(std::move(m));
    }

    Dataset raw = make_dataset(std::move(values), std::move(meta), std::move(names));
    try {
        return standardized(raw);
    } catch (const DataError& e) {
        throw DataError(values_path.string() + ": " + e.what());
    }
}

void write_values_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t c = 0; c < data.variable_names.size(); ++c) {
        out << (c ? "," : "") << data.variable_names[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
            out << (c ? "," : "") << fmt_double(data.values(r, c));
        }
        out << '\n';
    }
}

void write_meta_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "sample_id,individual_id,time_index,disease\n";
    for (const auto& m : data.meta) {
        out << m.sample_id << ',' << m.individual_id << ',' << m.time_index << ',' << m.disease << '\n';
    }
}

Dataset subset_individuals(const Dataset& data, std::span<const int> individual_indices) {
    std::vector<int> keep;
    for (int i : individual_indices) {
        const auto& rows = data.individuals.at(static_cast<std::size_t>(i)).rows;
        keep.insert(keep.end(), rows.begin(), rows.end());
    }
    std::sort(keep.begin(), keep.end());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(keep.size()), data.values.cols());
    std::vector<SampleMeta> meta;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        values.row(static_cast<Eigen::Index>(r)) = data.values.row(keep[r]);
        meta.push_back(data.meta[static_cast<std::size_t>(keep[r])]);
    }
    Dataset out = make_dataset(std::move(values), std::move(meta), data.variable_names);
    out.standardization = data.standardization;
    return out;
}

std::string canonical_serialization(const Dataset& data) {
    std::ostringstream os;
    os << "n=" << data.values.rows() << " p=" << data.values.cols() << '\n';
    for (const auto& name : data.variable_names) os << name << '\n';
    for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.values.cols(); ++c) os << fmt_double(data.values(r, c)) << ' ';
        os << '\n';
    }
    for (const auto& m : data.meta) {
        os << m.sample_id << ' ' << m.individual_id << ' ' << m.time_index << ' ' << m.disease << '\n';
    }
    for (Eigen::Index c = 0; c < data.standardization.mean.size(); ++c) {
        os << fmt_double(data.standardization.mean(c)) << ' ' << fmt_double(data.standardization.scale(c)) << '\n';
    }
    return os.str();
}

std::vector<int> row_disease(const Dataset& data) {
    std::vector<int> out(data.meta.size());
    for (std::size_t r = 0; r < data.meta.size(); ++r) out[r] = data.meta[r].disease;
    return out;
}

} // namespace xlate
