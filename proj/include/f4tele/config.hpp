#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4tele/model.hpp"
#include "f4tele/scheduler.hpp"

namespace f4tele {

class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(const std::string& source, int line, const std::string& key, const std::string& message);
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

struct IniEntry {
    std::string value;
    int line = 0;
};

// Flat `[section]` / `key = value` text; `#` and `;` start comments.
class IniDocument {
public:
    static IniDocument parse(std::istream& in, const std::string& source);
    static IniDocument load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    const IniEntry* find(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;
    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    const std::string& source() const { return source_; }

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key, std::vector<double> fallback) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key, std::vector<int> fallback) const;

    // Throws for any key in `section` not listed in `allowed`.
    void require_known(const std::string& section, const std::vector<std::string>& allowed) const;
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const;

private:
    std::string source_;
    std::map<std::string, std::map<std::string, IniEntry>> sections_;
    std::map<std::string, int> section_lines_;
};

// How the data racks are grouped into sets.
struct PartitionRequest {
    std::vector<int> hotspot_racks;                   // auto partition
    std::vector<std::vector<int>> explicit_sets;      // takes precedence when non-empty
    std::vector<int> explicit_hot_set_ids;
};

enum class InServiceReading { ScheduleShare, Utilization };

struct SweepAxes {
    std::vector<double> loads{1.0};
    std::vector<int> k_hot;                // empty: keep the configured partition
    std::vector<double> slot_lengths;      // empty: configured d
    std::vector<double> mu_multipliers{1.0};
};

/// Everything a config file describes, before validation.
struct ExperimentConfig {
    ClusterSpec cluster;
    PartitionRequest partition;
    double slot_length = 0.01;
    SchedulePolicy policy = InterleavedHotspot{};
    SlotEndPolicy slot_end = SlotEndPolicy::Complete;
    TrafficProfile traffic;
    ServiceModel service;
    bool mean_service_set = false;  // otherwise packet_bytes·8/fso_rate
    InServiceReading reading = InServiceReading::ScheduleShare;
    SweepAxes sweep;

    // Throws ConfigViolation; partitioning and scheduling errors are reported
    // as violations too.
    ValidatedConfig build() const;
    ServiceModel effective_service() const;
};

ExperimentConfig parse_config(const IniDocument& doc);
ExperimentConfig load_config(const std::string& path);

}  // namespace f4tele
