#include "tcbo/mdp_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tcbo/config.hpp"

namespace tcbo {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

FiniteMdp grid_mdp(const GridSpec& spec, int horizon, std::pair<int, int> initial_cell,
                   const std::vector<std::pair<int, int>>& terminal_cells) {
    const int R = static_cast<int>(spec.mask_rows.size());
    if (R == 0) throw std::invalid_argument("empty grid mask");
    const int C = static_cast<int>(spec.mask_rows[0].size());
    for (const auto& row : spec.mask_rows)
        if (static_cast<int>(row.size()) != C) throw std::invalid_argument("ragged grid mask");
    if (spec.moves != 4 && spec.moves != 8) throw std::invalid_argument("grid moves must be 4 or 8");

    auto free_cell = [&](int r, int c) {
        return r >= 0 && r < R && c >= 0 && c < C && spec.mask_rows[r][static_cast<size_t>(c)] == '1';
    };

    std::map<std::pair<int, int>, int> index;
    FiniteMdp mdp;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (free_cell(r, c)) {
                index[{r, c}] = static_cast<int>(mdp.state_names.size());
                mdp.state_names.push_back("x" + std::to_string(r) + "_" + std::to_string(c));
            }
    const int X = static_cast<int>(mdp.state_names.size());
    if (X == 0) throw std::invalid_argument("grid mask has no free cells");

    mdp.embeddings.resize(X, 2);
    for (const auto& [cell, i] : index) {
        const double u = C > 1 ? static_cast<double>(cell.second) / (C - 1) : 0.0;
        const double v = R > 1 ? static_cast<double>(cell.first) / (R - 1) : 0.0;
        mdp.embeddings(i, 0) = spec.lo0 + u * (spec.hi0 - spec.lo0);
        mdp.embeddings(i, 1) = spec.lo1 + v * (spec.hi1 - spec.lo1);
    }

    static const int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static const int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static const int dr4[] = {-1, 0, 0, 1};
    static const int dc4[] = {0, -1, 1, 0};

    mdp.actions.resize(X);
    for (const auto& [cell, i] : index) {
        if (spec.stay) mdp.actions[i].push_back({"stay", {{i, 1.0}}});
        const int n = spec.moves;
        const int* dr = n == 8 ? dr8 : dr4;
        const int* dc = n == 8 ? dc8 : dc4;
        for (int k = 0; k < n; ++k) {
            const int r = cell.first + dr[k], c = cell.second + dc[k];
            if (!free_cell(r, c)) continue;
            const std::string name = "d" + std::to_string(dr[k] + 1) + std::to_string(dc[k] + 1);
            mdp.actions[i].push_back({name, {{index.at({r, c}), 1.0}}});
        }
    }

    auto cell_index = [&](std::pair<int, int> cell, const char* what) {
        auto it = index.find(cell);
        if (it == index.end())
            throw std::invalid_argument(std::string(what) + " cell is not a free grid cell");
        return it->second;
    };

    mdp.horizon = horizon;
    mdp.initial_law = Eigen::VectorXd::Zero(X);
    mdp.initial_law(cell_index(initial_cell, "initial")) = 1.0;
    for (const auto& cell : terminal_cells) mdp.terminal_states.push_back(cell_index(cell, "terminal"));
    mdp.finalize();
    if (!mdp.terminal_states.empty()) mdp = reachability_filter(mdp, mdp.terminal_states);
    return mdp;
}

FiniteMdp parse_mdp_text(const std::string& text) {
    // ordered parse: state indices follow file order
    std::istringstream in(text);
    std::string line, section;
    int horizon = -1;
    std::string initial_spec, terminal_spec;
    std::vector<std::pair<std::string, std::string>> state_lines, transition_lines;
    GridSpec grid;
    std::map<int, std::string> grid_rows;
    bool has_grid = false;

    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (section == "mdp") {
            if (key == "horizon") horizon = std::stoi(value);
            else if (key == "initial") initial_spec = value;
            else if (key == "terminal") terminal_spec = value;
            else throw ConfigError("unknown [mdp] key: " + key, lineno);
        } else if (section == "states") {
            state_lines.emplace_back(key, value);
        } else if (section == "transitions") {
            transition_lines.emplace_back(key, value);
        } else if (section == "grid") {
            has_grid = true;
            if (key == "moves") grid.moves = std::stoi(value);
            else if (key == "stay") grid.stay = (value == "true" || value == "1");
            else if (key == "box") {
                const auto v = split_ws(value);
                if (v.size() != 4) throw ConfigError("box expects: lo0 hi0 lo1 hi1", lineno);
                grid.lo0 = std::stod(v[0]);
                grid.hi0 = std::stod(v[1]);
                grid.lo1 = std::stod(v[2]);
                grid.hi1 = std::stod(v[3]);
            } else if (key.rfind("row", 0) == 0) {
                grid_rows[std::stoi(key.substr(3))] = value;
            } else {
                throw ConfigError("unknown [grid] key: " + key, lineno);
            }
        } else {
            throw ConfigError("unknown section: " + section, lineno);
        }
    }

    if (horizon < 1) throw std::runtime_error("mdp file missing horizon");

    if (has_grid) {
        for (const auto& [i, row] : grid_rows) {
            if (i != static_cast<int>(grid.mask_rows.size()))
                throw std::runtime_error("grid rows must be contiguous from row0");
            grid.mask_rows.push_back(row);
        }
        auto parse_cell = [](const std::string& s) {
            const auto v = split_ws(s);
            if (v.size() != 2) throw std::runtime_error("grid cell expects: row col");
            return std::make_pair(std::stoi(v[0]), std::stoi(v[1]));
        };
        std::vector<std::pair<int, int>> terminals;
        const auto toks = split_ws(terminal_spec);
        if (toks.size() % 2 != 0) throw std::runtime_error("terminal cells expect row col pairs");
        for (size_t j = 0; j + 1 < toks.size(); j += 2)
            terminals.emplace_back(std::stoi(toks[j]), std::stoi(toks[j + 1]));
        return grid_mdp(grid, horizon, parse_cell(initial_spec), terminals);
    }

    FiniteMdp mdp;
    std::map<std::string, int> index;
    Eigen::Index dim = -1;
    std::vector<Eigen::VectorXd> coords;
    for (const auto& [name, value] : state_lines) {
        if (index.count(name)) throw std::runtime_error("duplicate state: " + name);
        const auto v = split_ws(value);
        if (v.empty()) throw std::runtime_error("state " + name + " has no embedding coords");
        if (dim < 0) dim = static_cast<Eigen::Index>(v.size());
        if (static_cast<Eigen::Index>(v.size()) != dim)
            throw std::runtime_error("inconsistent embedding dimension at state " + name);
        Eigen::VectorXd c(dim);
        for (Eigen::Index i = 0; i < dim; ++i) c(i) = std::stod(v[static_cast<size_t>(i)]);
        index[name] = static_cast<int>(mdp.state_names.size());
        mdp.state_names.push_back(name);
        coords.push_back(std::move(c));
    }
    if (coords.empty()) throw std::runtime_error("mdp file has no states");
    mdp.embeddings.resize(static_cast<Eigen::Index>(coords.size()), dim);
    for (size_t i = 0; i < coords.size(); ++i) mdp.embeddings.row(static_cast<Eigen::Index>(i)) = coords[i];

    auto state_id = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw std::runtime_error("unknown state: " + name);
        return it->second;
    };

    mdp.actions.resize(coords.size());
    for (const auto& [key, value] : transition_lines) {
        const auto head = split_ws(key);
        if (head.size() != 2) throw std::runtime_error("transition key expects: state action");
        const int from = state_id(head[0]);
        MdpAction act;
        act.name = head[1];
        for (const std::string& tok : split_ws(value)) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw std::runtime_error("transition expects succ:prob");
            act.next.emplace_back(state_id(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
        }
        mdp.actions[from].push_back(std::move(act));
    }

    mdp.horizon = horizon;
    mdp.initial_law = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(coords.size()));
    mdp.initial_law(state_id(trim(initial_spec))) = 1.0;
    for (const std::string& t : split_ws(terminal_spec)) mdp.terminal_states.push_back(state_id(t));
    mdp.finalize();
    if (!mdp.terminal_states.empty()) mdp = reachability_filter(mdp, mdp.terminal_states);
    return mdp;
}

FiniteMdp load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mdp file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mdp_text(ss.str());
}

}  // namespace tcbo
