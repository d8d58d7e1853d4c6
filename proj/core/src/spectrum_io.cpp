#include <cstdio>
#include <fstream>
#include <sstream>

#include "strainsim/errors.hpp"
#include "strainsim/spectroscopy.hpp"

namespace strainsim::spectroscopy {

namespace {

constexpr std::string_view kHeader = "detuning_ghz,signal";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw SpectrumFormatError("line " + std::to_string(line) + ": '" + field + "' is not a number");
  }
  if (used != field.size()) {
    throw SpectrumFormatError("line " + std::to_string(line) + ": trailing characters in '" + field + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

PLESpectrum read_spectrum_csv(std::istream& in) {
  PLESpectrum spec;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kHeader) {
        throw SpectrumFormatError("expected header '" + std::string(kHeader) + "', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw SpectrumFormatError("line " + std::to_string(line_no) + ": expected two columns");
    }
    spec.detuning_ghz.push_back(parse_number(trim(line.substr(0, comma)), line_no));
    spec.signal.push_back(parse_number(trim(line.substr(comma + 1)), line_no));
  }
  if (!header_seen) throw SpectrumFormatError("empty spectrum file");
  spec.validate();
  return spec;
}

PLESpectrum read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpectrumFormatError("cannot open spectrum file " + path);
  return read_spectrum_csv(in);
}

void write_spectrum_csv(std::ostream& out, const PLESpectrum& spec) {
  spec.validate();
  out << kHeader << '\n';
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out << format_double(spec.detuning_ghz[i]) << ',' << format_double(spec.signal[i]) << '\n';
  }
}

void write_spectrum_csv(const std::string& path, const PLESpectrum& spec) {
  std::ofstream out(path);
  if (!out) throw SpectrumFormatError("cannot write spectrum file " + path);
  write_spectrum_csv(out, spec);
}

}  // namespace strainsim::spectroscopy
