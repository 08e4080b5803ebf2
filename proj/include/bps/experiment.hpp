#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bps {

// Flat key-value experiment description. Keys are lowercase identifiers, values opaque
// strings (distribution specs keep their case). Serialization is canonical -- sorted
// keys, one `key=value` line each -- so serialize(parse(text)) is idempotent and the
// identity hash is stable.
class ExperimentConfig {
public:
    static ExperimentConfig from_text(std::string_view text);
    static ExperimentConfig from_file(const std::string& path);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const;

    // Typed getters; a missing key or malformed value raises ValidationError naming it.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::int64_t> get_int_list(const std::string& key) const;

    std::string kind() const;            // required key `kind`
    std::uint64_t master_seed() const;   // key `master_seed`, default 1
    int jobs() const;                    // key `jobs`, default 1 (sequential)
    std::string output_path() const;     // key `output_path`, may be empty
    std::string format() const;          // key `format`, default and only value "csv"

    std::string serialize() const;
    // FNV-1a 64 over the canonical serialization minus output_path / jobs / format,
    // which affect where and how fast results land but not what they are.
    std::string identity_hash() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// CSV-bound table with a `#` provenance header (tool version, config hash, master seed;
// deliberately no timestamps so reruns are byte-identical).
class ResultTable {
public:
    ResultTable(std::vector<std::string> columns, std::string config_hash,
                std::uint64_t master_seed);

    static std::string num(double v);  // %.12g
    static std::string integer(std::int64_t v);

    void add_row(std::vector<std::string> cells);  // width-checked, no commas/newlines

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string to_csv() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::string config_hash_;
    std::uint64_t master_seed_;
};

// Validates the whole config up front (aggregating every complaint into one error),
// dispatches on `kind`, and runs with `jobs`-way deterministic parallelism: work is cut
// into fixed batches with seeds derived from (master_seed, batch), and batch results are
// reduced in index order, so output bytes never depend on the job count.
ResultTable run_experiment(const ExperimentConfig& cfg);

// Writes via a temporary file in the same directory plus an atomic rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace bps
