#pragma once

#include <concepts>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "hydrochain/chain.hpp"
#include "hydrochain/macro.hpp"
#include "hydrochain/thermo_table.hpp"

namespace hydrochain::csv {

/// Comma-separated rows; doubles are written with 17 significant digits so
/// that files round-trip exactly and compare byte for byte across runs.
class Writer
{
 public:
  Writer(std::ostream& out, std::span<const std::string_view> header);
  Writer(std::ostream& out, std::initializer_list<std::string_view> header)
      : Writer(out, std::span<const std::string_view>(header.begin(), header.size()))
  {
  }

  template <class... T>
  void row(const T&... cells)
  {
    std::string line;
    std::size_t k = 0;
    ((line += (k++ ? "," : ""), append(line, cells)), ...);
    line += '\n';
    out_ << line;
    ++rows_;
  }

  void row(std::span<const double> cells);

  std::size_t rows() const noexcept { return rows_; }

 private:
  static void append(std::string& line, double v) { line += fmt::format("{:.17g}", v); }
  static void append(std::string& line, std::string_view v) { line += v; }
  static void append(std::string& line, const std::string& v) { line += v; }
  static void append(std::string& line, const char* v) { line += v; }
  template <std::integral I>
  static void append(std::string& line, I v)
  {
    line += fmt::format("{}", v);
  }

  std::ostream& out_;
  std::size_t rows_ = 0;
};

/// t,E,W,Q_p,Q_r,M_p,M_r,first_law_residual
void write_ledger(std::ostream& out, std::span<const micro::LedgerRecord> ledger);

/// t,i,r,p with i the 1-based site index.
void write_snapshots(std::ostream& out, std::span<const micro::ChainState> snapshots);

/// t,x,r,p,tau at cell centres.
void write_macro_fields(std::ostream& out, std::span<const macro::MacroState> snapshots,
                        const thermo::ThermoTable& table);

/// t,F,W,D,residual
void write_balance(std::ostream& out, std::span<const macro::BalanceRecord> balance);

}  // namespace hydrochain::csv
