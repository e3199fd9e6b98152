#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "f4tele/sim.hpp"

namespace f4tele {

// Shortest round-trippable-enough fixed formatting used by every CSV writer.
std::string fmt_num(double v);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

std::string sets_csv(const SimReport& report);
std::string flows_csv(const SimReport& report);
// Hash over sets_csv + flows_csv; identical runs give identical hashes.
std::uint64_t report_hash(const SimReport& report);
void write_summary(std::ostream& os, const SimReport& report);

}  // namespace f4tele
