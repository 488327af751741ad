#pragma once

#include <filesystem>
#include <string>

#include "perfhom/darcy.hpp"
#include "perfhom/homogenize.hpp"

namespace perfhom {

// Serialization of result tables.  All output is a pure function of the
// inputs: numbers are printed in shortest round-trip form, keys keep
// insertion order, and nothing volatile (timings, thread counts, paths)
// enters these documents; such facts belong in meta_json, which is written
// next to a report, never inside it.

std::string eta_permeability_json(const EtaPermeability& p);
std::string permeability_report_json(const PermeabilityLimit& p);
std::string permeability_table_csv(const PermeabilityLimit& p);

std::string small_sweep_json(const SmallSweepConfig& cfg, const std::vector<SmallSweepRow>& rows);
std::string small_sweep_csv(const std::vector<SmallSweepRow>& rows);
std::string large_sweep_json(const LargeSweepConfig& cfg, const LargeSweepResult& result);
std::string large_sweep_csv(const LargeSweepResult& result);

std::string poincare_json(const std::vector<PoincareRow>& rows);
std::string poincare_csv(const std::vector<PoincareRow>& rows);

std::string ledger_csv(const std::vector<LedgerRow>& rows);
std::string trajectory_summary_json(const Trajectory& traj);
std::string darcy_summary_json(const DarcySolution& sol);
std::string convergence_json(const ConvergenceReport& report);

/// Volatile run facts, kept out of the deterministic reports.
std::string meta_json(const std::string& command, int threads, double wall_seconds);

void write_text(const std::filesystem::path& path, const std::string& text);

// Field dumps: <base>.json sidecar describing layout, spacing, time and the
// geometry hash, plus <base>.f64 with the raw values (little endian, face
// components concatenated in axis order).

void dump_field(const std::filesystem::path& base, const FaceField& f, const Mask& mask, double time);
void dump_field(const std::filesystem::path& base, const CellField& f, const Mask& mask, double time);
void dump_mask(const std::filesystem::path& base, const Mask& mask);

} // namespace perfhom
