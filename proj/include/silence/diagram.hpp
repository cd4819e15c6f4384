#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "silence/core.hpp"
#include "silence/run.hpp"

namespace silence {

namespace detail {

// Display width of a UTF-8 string (counts code points, not bytes).
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width - std::min(width, display_width(s)), ' ');
}

}  // namespace detail

/// Renders a run as one lane per process and one column per round.
///
/// A cell lists the messages the process sent in that round as TAG>receiver.
/// Boundary markers open the cell: C commit, A abort, H halt. A mid-round
/// decision is written c or a after the sends. A crash shows ⊥ with whatever
/// left before it; the lane stays empty afterwards.
inline std::string render_diagram(const Run& run) {
  const int n = run.n();
  const int rounds = run.end_time;
  // cells[p][k] is round k+1; the extra column holds markers at end_time
  std::vector<std::vector<std::string>> cells(n, std::vector<std::string>(rounds + 1));

  for (ProcessId p = 0; p < n; ++p) {
    auto& lane = cells[p];
    const auto crash = run.crash_round(p);
    if (const auto& d = run.decisions[p]; d && d->time <= rounds) {
      std::string& cell = lane[d->time];
      if (!d->mid_round) cell += d->action == Action::Commit ? "C " : "A ";
    }
    if (const auto& h = run.halt_times[p]; h && *h <= rounds) lane[*h] += "H ";
    if (crash && *crash <= rounds) lane[*crash - 1] += "⊥ ";
  }
  for (const auto& msg : run.messages) {
    if (msg.round > rounds) continue;
    std::string& cell = cells[msg.sender][msg.round - 1];
    cell += std::string(to_string(msg.payload.tag));
    if (msg.payload.tag == Tag::Ids) {
      cell += "{";
      const auto ids = msg.payload.ids.members();
      for (std::size_t k = 0; k < ids.size(); ++k) cell += (k ? "," : "") + std::to_string(ids[k]);
      cell += "}";
    }
    cell += ">" + std::to_string(msg.receiver) + " ";
  }
  for (ProcessId p = 0; p < n; ++p)
    if (const auto& d = run.decisions[p]; d && d->mid_round && d->time < rounds + 1)
      cells[p][d->time] += d->action == Action::Commit ? "c " : "a ";

  std::size_t width = 4;
  for (const auto& lane : cells)
    for (auto& cell : lane) width = std::max(width, detail::display_width(cell));
  width += 1;

  std::ostringstream out;
  out << run.protocol << " n=" << n << " f=" << run.params.f << " "
      << to_string(run.params.context) << " horizon=" << run.params.horizon << " values=";
  for (int v : run.initial_values) out << v;
  out << "\n";

  out << detail::pad("", 7);
  for (int r = 1; r <= rounds; ++r) out << "|" << detail::pad(" r" + std::to_string(r), width);
  out << "| t=" << rounds << "\n";

  for (ProcessId p = 0; p < n; ++p) {
    out << detail::pad("p" + std::to_string(p) + "(" + std::to_string(run.initial_values[p]) + ")", 7);
    for (int k = 0; k <= rounds; ++k) {
      out << "|" << (k < rounds ? detail::pad(cells[p][k], width) : cells[p][k]);
    }
    out << "\n";
  }
  out << "C/A commit/abort at the boundary, c/a mid-round, H halt, ⊥ crash, TAG>q message to q\n";
  return out.str();
}

}  // namespace silence
