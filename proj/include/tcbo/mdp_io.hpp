#ifndef TCBO_MDP_IO_HPP
#define TCBO_MDP_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "tcbo/mdp.hpp"

namespace tcbo {

// Rectangular grid world. Free cells become states embedded on the box
// [lo, hi]^2 (column -> first coordinate, row -> second); moves are the
// 4- or 8-neighborhood restricted by the mask, plus an optional stay action.
struct GridSpec {
    std::vector<std::string> mask_rows;  // '1' = free, '0' = obstacle
    int moves = 8;                       // 4 or 8
    bool stay = true;
    double lo0 = 0.0, hi0 = 1.0;  // column axis
    double lo1 = 0.0, hi1 = 1.0;  // row axis
};

FiniteMdp grid_mdp(const GridSpec& spec, int horizon, std::pair<int, int> initial_cell,
                   const std::vector<std::pair<int, int>>& terminal_cells = {});

// MDP description file. Sections:
//   [mdp]         horizon, initial, terminal (state names / "row col" on grids)
//   [states]      name = embedding coords            (explicit form)
//   [transitions] from action = succ:prob succ:prob  (explicit form)
//   [grid]        moves, stay, box, row<i> = 0/1 mask rows (grid form)
FiniteMdp load_mdp_file(const std::string& path);
FiniteMdp parse_mdp_text(const std::string& text);

}  // namespace tcbo

#endif
