#pragma once

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "qmotion/cli.hpp"
#include "qmotion/quantile.hpp"
#include "qmotion/tunneling.hpp"

namespace qmotion::cli::detail {

inline constexpr const char* kUnitsLine =
    "# units: hbar = m = 1; x in hbar/sqrt(eV m), t in hbar/eV, v and k in sqrt(eV m)/hbar, V in eV";

// CSV with a unit comment line and a header; floats as %.17g, LF endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& num(double v);
  CsvWriter& integer(long long v);
  CsvWriter& text(const std::string& v);
  CsvWriter& empty();
  void end_row();

 private:
  void sep();
  std::FILE* file_ = nullptr;
  std::string path_;
  bool first_ = true;
};

std::string g17(double v);

std::vector<double> time_grid(const ScenarioConfig& c);

struct SpectralSetup {
  KGrid grid;
  SpectralFunction spectral;
  std::shared_ptr<const SpectralPacketModel> free;
  std::shared_ptr<const SpectralPacketModel> tunnel;
};

SpectralSetup spectral_setup(const ScenarioConfig& c);

// Applies the configured fault (if any) to a 1D model.
PacketModelPtr with_fault(const ScenarioConfig& c, PacketModelPtr model);

std::string sibling_path(const std::string& out, const std::string& suffix);

}  // namespace qmotion::cli::detail
