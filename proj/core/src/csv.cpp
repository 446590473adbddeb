#include "hydrochain/csv.hpp"

namespace hydrochain::csv {

Writer::Writer(std::ostream& out, std::span<const std::string_view> header) : out_(out)
{
  std::string line;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) line += ',';
    line += header[k];
  }
  out_ << line << '\n';
}

void Writer::row(std::span<const double> cells)
{
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) line += ',';
    append(line, cells[k]);
  }
  out_ << line << '\n';
  ++rows_;
}

void write_ledger(std::ostream& out, std::span<const micro::LedgerRecord> ledger)
{
  Writer w(out, {"t", "E", "W", "Q_p", "Q_r", "M_p", "M_r", "first_law_residual"});
  for (const auto& rec : ledger) {
    const auto& l = rec.ledger;
    w.row(rec.t, l.E, l.W, l.Q_p, l.Q_r, l.M_p, l.M_r, l.first_law_residual());
  }
}

void write_snapshots(std::ostream& out, std::span<const micro::ChainState> snapshots)
{
  Writer w(out, {"t", "i", "r", "p"});
  for (const auto& s : snapshots) {
    for (int i = 0; i < s.size(); ++i) w.row(s.t, i + 1, s.r[i], s.p[i]);
  }
}

void write_macro_fields(std::ostream& out, std::span<const macro::MacroState> snapshots,
                        const thermo::ThermoTable& table)
{
  Writer w(out, {"t", "x", "r", "p", "tau"});
  for (const auto& s : snapshots) {
    for (int j = 0; j < s.size(); ++j) w.row(s.t, s.x(j), s.r[j], s.p[j], table.tension(s.r[j]));
  }
}

void write_balance(std::ostream& out, std::span<const macro::BalanceRecord> balance)
{
  Writer w(out, {"t", "F", "W", "D", "residual"});
  for (const auto& b : balance) w.row(b.t, b.free_energy, b.work, b.dissipation, b.residual);
}

}  // namespace hydrochain::csv
