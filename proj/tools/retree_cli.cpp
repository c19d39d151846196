// Command-line front end. `sim` writes simulator tables, `verify` runs a
// named suite and reports pass/fail, `gh`, `trim`, and `quartet` expose the
// metric toolkit on serialized trees. Every table carries the seed in a
// leading comment line; exit status is 0 only when everything invoked passed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retree/suites.hpp"
#include "retree/tree_io.hpp"

using namespace retree;

namespace {

struct Table {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string cell(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_output(const Table& t, const std::string& out,
                  const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    for (const auto& c : t.comments) os << "# " << c << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << row[i];
      os << "\n";
    }
  } else if (format == "json") {
    nlohmann::json j;
    j["comments"] = t.comments;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    os << j.dump(2) << "\n";
  } else {
    throw TreeError(TreeErrorCode::BadInput,
                    "format must be csv or json, got " + format);
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out);
    if (!f) throw TreeError(TreeErrorCode::BadInput, "cannot open " + out);
    f << os.str();
  }
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw TreeError(TreeErrorCode::BadInput, "cannot open " + out);
    f << text;
  }
}

RootedTree load_tree(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw TreeError(TreeErrorCode::BadInput, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return tree_from_json_string(os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite rooted real trees: simulators, metrics, checks"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::uint64_t replicates = 0;
  std::string out;
  std::string format = "csv";

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "master seed; replicate k uses stream k");
    c->add_option("--replicates", replicates, "number of replicates");
    c->add_option("--out", out, "output file (default: stdout)");
    c->add_option("--format", format, "csv or json (tables only)")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  // --- sim ---
  CLI::App* sim = app.add_subcommand("sim", "run a simulator, write a table");
  sim->require_subcommand(1);

  CLI::App* sim_rgr = sim->add_subcommand(
      "rgr",
      "growth with re-grafting; columns: replicate,height (marked-point "
      "height at t-max, or tree height with --marks none)");
  std::string init_path;
  double t_max = 25.0;
  std::string marks = "root";
  sim_rgr->add_option("--init", init_path,
                      "initial tree (JSON; default: one-point tree)");
  sim_rgr->add_option("--t-max", t_max, "time horizon");
  sim_rgr->add_option("--marks", marks, "marked point: root or none")
      ->check(CLI::IsMember({"root", "none"}));
  add_common(sim_rgr);

  CLI::App* sim_lb = sim->add_subcommand(
      "linebreak", "one line-breaking tree as JSON (--format is ignored)");
  std::uint64_t lb_n = 4;
  sim_lb->add_option("--n", lb_n, "number of leaves");
  add_common(sim_lb);

  CLI::App* sim_cp = sim->add_subcommand(
      "coupled",
      "coupled pair per replicate; columns: "
      "replicate,shape_r,shape_t,max_edge_gap");
  std::uint64_t cp_n = 4;
  sim_cp->add_option("--n", cp_n, "number of leaves");
  add_common(sim_cp);

  CLI::App* sim_ab = sim->add_subcommand(
      "ab",
      "occupation counts of the chain on rooted combinatorial trees; "
      "columns: tree,count,frequency");
  int ab_n = 3;
  std::uint64_t ab_events = 1000000;
  sim_ab->add_option("--n", ab_n, "number of vertices (2..5)");
  sim_ab->add_option("--events", ab_events, "number of chain events");
  add_common(sim_ab);

  CLI::App* sim_abr = sim->add_subcommand(
      "ab-rescaled",
      "one rescaled trajectory; columns: time,mark_height (event times)");
  int abr_n = 10000;
  double abr_tmax = 2.0;
  sim_abr->add_option("--n", abr_n, "number of vertices");
  sim_abr->add_option("--t-max", abr_tmax, "rescaled time horizon");
  add_common(sim_abr);

  CLI::App* sim_ray = sim->add_subcommand(
      "rayleigh",
      "piecewise-deterministic height process; columns: replicate,value "
      "(marginal at t-max)");
  double ray_r0 = 0.0;
  double ray_tmax = 25.0;
  sim_ray->add_option("--r0", ray_r0, "starting height");
  sim_ray->add_option("--t-max", ray_tmax, "time horizon");
  add_common(sim_ray);

  // --- verify ---
  CLI::App* verify = app.add_subcommand(
      "verify", "run a named suite; exits 0 only if it passes");
  std::string verify_name;
  std::string verify_suite;
  int verify_n = 0;
  verify->add_option("name", verify_name, "suite name, or a family name")
      ->required();
  verify->add_option("--suite", verify_suite,
                     "suite within a family, e.g. rayleigh --suite rate");
  verify->add_option("--n", verify_n, "size override where applicable");
  add_common(verify);

  // --- gh ---
  CLI::App* gh = app.add_subcommand(
      "gh", "rooted distance between two trees via exhaustive nets");
  std::string gh_a, gh_b;
  double gh_delta = 0.25;
  gh->add_option("--a", gh_a, "first tree (JSON)")->required();
  gh->add_option("--b", gh_b, "second tree (JSON)")->required();
  gh->add_option("--delta", gh_delta, "net resolution");
  add_common(gh);

  // --- trim ---
  CLI::App* tr = app.add_subcommand("trim", "trim a tree at depth eta");
  std::string trim_in;
  double trim_eta = 0.5;
  tr->add_option("--eta", trim_eta, "trimming depth");
  tr->add_option("--in", trim_in, "input tree (JSON)")->required();
  add_common(tr);

  // --- quartet ---
  CLI::App* qt = app.add_subcommand(
      "quartet", "rebuild a four-leaf tree from a 4x4 distance matrix");
  std::string qt_matrix;
  qt->add_option("--matrix", qt_matrix, "CSV file with four rows of four")
      ->required();
  add_common(qt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_rgr->parsed()) {
      if (replicates == 0) replicates = 1000;
      RootedTree init;
      if (!init_path.empty()) init = load_tree(init_path);
      Table t;
      t.comments = {"seed=" + std::to_string(seed)};
      t.columns = {"replicate", "height"};
      for (std::uint64_t i = 0; i < replicates; ++i) {
        Rng rng = Rng::stream(seed, i + 1);
        std::vector<TreePoint> ms;
        if (marks == "root") ms.push_back({init.root(), 0.0});
        Trajectory traj = simulate_rgr(init, t_max, rng, ms);
        double h = ms.empty() ? height(traj.final_tree)
                              : traj.mark_heights[0].back();
        t.rows.push_back({std::to_string(i), cell(h)});
      }
      write_output(t, out, format);
      return 0;
    }

    if (sim_lb->parsed()) {
      Rng rng = Rng::stream(seed, 1);
      LineBreak lb = simulate_line_breaking(lb_n, rng);
      nlohmann::json j = tree_to_json(lb.tree);
      j["seed"] = seed;
      write_text(j.dump(2) + "\n", out);
      return 0;
    }

    if (sim_cp->parsed()) {
      if (replicates == 0) replicates = 1000;
      Table t;
      t.comments = {"seed=" + std::to_string(seed)};
      t.columns = {"replicate", "shape_r", "shape_t", "max_edge_gap"};
      for (std::uint64_t i = 0; i < replicates; ++i) {
        Rng rng = Rng::stream(seed, i + 1);
        CoupledPair cp = coupled_Rn_Tn(cp_n, rng);
        std::vector<double> er, et;
        for (int v = 0; v < cp.r_tree.n(); ++v)
          if (v != cp.r_tree.root()) er.push_back(cp.r_tree.edge_length(v));
        for (int v = 0; v < cp.t_tree.n(); ++v)
          if (v != cp.t_tree.root()) et.push_back(cp.t_tree.edge_length(v));
        std::sort(er.begin(), er.end());
        std::sort(et.begin(), et.end());
        double gap = 0.0;
        for (std::size_t k = 0; k < er.size() && k < et.size(); ++k)
          gap = std::max(gap, std::abs(er[k] - et[k]));
        t.rows.push_back({std::to_string(i), shape_of(cp.r_tree),
                          shape_of(cp.t_tree), cell(gap)});
      }
      write_output(t, out, format);
      return 0;
    }

    if (sim_ab->parsed()) {
      std::vector<std::string> keys;
      for (const CombTree& s : enumerate_rooted_trees(ab_n))
        keys.push_back(comb_key(s));
      std::sort(keys.begin(), keys.end());
      Rng rng = Rng::stream(seed, 0);
      CombTree state = comb_path(ab_n);
      std::vector<std::uint64_t> cnt(keys.size(), 0);
      for (std::uint64_t k = 0; k < ab_events; ++k) {
        int pick = 1 + static_cast<int>(rng.uniform_int(
                           static_cast<std::uint64_t>(ab_n)));
        ab_apply(state, pick);
        auto i = std::lower_bound(keys.begin(), keys.end(), comb_key(state)) -
                 keys.begin();
        ++cnt[static_cast<std::size_t>(i)];
      }
      Table t;
      t.comments = {"seed=" + std::to_string(seed),
                    "events=" + std::to_string(ab_events)};
      t.columns = {"tree", "count", "frequency"};
      for (std::size_t i = 0; i < keys.size(); ++i)
        t.rows.push_back(
            {keys[i], std::to_string(cnt[i]),
             cell(static_cast<double>(cnt[i]) /
                  static_cast<double>(ab_events))});
      write_output(t, out, format);
      return 0;
    }

    if (sim_abr->parsed()) {
      Rng rng = Rng::stream(seed, 1);
      RescaledAbConfig cfg;
      cfg.record_series = true;
      double scale = std::sqrt(static_cast<double>(abr_n));
      RescaledAb run = rescaled_ab(abr_n, abr_tmax, rng, 2.0 / scale, cfg);
      Table t;
      t.comments = {"seed=" + std::to_string(seed),
                    "n=" + std::to_string(abr_n),
                    "final_mark_height=" + cell(run.final_mark_height),
                    "final_trimmed_length=" + cell(run.final_trimmed_length)};
      t.columns = {"time", "mark_height"};
      for (std::size_t i = 0; i < run.times.size(); ++i)
        t.rows.push_back({cell(run.times[i]), cell(run.mark_heights[i])});
      write_output(t, out, format);
      return 0;
    }

    if (sim_ray->parsed()) {
      if (replicates == 0) replicates = 100000;
      Table t;
      t.comments = {"seed=" + std::to_string(seed)};
      t.columns = {"replicate", "value"};
      for (std::uint64_t i = 0; i < replicates; ++i) {
        Rng rng = Rng::stream(seed, i + 1);
        t.rows.push_back(
            {std::to_string(i),
             cell(path_value(pdmp_simulate(ray_r0, ray_tmax, rng), ray_tmax))});
      }
      write_output(t, out, format);
      return 0;
    }

    if (verify->parsed()) {
      std::string name = verify_name;
      if (!verify_suite.empty()) name += "-" + verify_suite;
      SuiteConfig cfg;
      if (verify->count("--seed")) cfg.seed = seed;
      cfg.replicates = replicates;
      cfg.n = verify_n;
      TestReport r = run_suite(name, cfg);
      if (!out.empty()) export_report(r, out, format);
      std::cout << report_json(r).dump(2) << "\n";
      return r.pass ? 0 : 1;
    }

    if (gh->parsed()) {
      RootedTree a = load_tree(gh_a);
      RootedTree b = load_tree(gh_b);
      auto [value, err] = gh_root_exact(a, b, gh_delta);
      auto [lo, hi] = gh_root_bounds(a, b);
      nlohmann::json j{{"value", value},
                       {"error_bound", err},
                       {"lower", lo},
                       {"upper", hi}};
      write_text(j.dump(2) + "\n", out);
      return 0;
    }

    if (tr->parsed()) {
      RootedTree t = load_tree(trim_in);
      write_text(tree_to_json(trim(t, trim_eta)).dump(2) + "\n", out);
      return 0;
    }

    if (qt->parsed()) {
      std::ifstream f(qt_matrix);
      if (!f)
        throw TreeError(TreeErrorCode::BadInput, "cannot open " + qt_matrix);
      std::vector<std::vector<double>> d;
      std::string line;
      while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
        d.push_back(row);
      }
      QuartetResult q = quartet_reconstruct(d);
      static const char* shape_names[] = {"I", "II", "III", "IV"};
      nlohmann::json j{
          {"shape", shape_names[static_cast<int>(q.shape)]},
          {"pendant", q.pendant},
          {"internal_len", q.internal_len},
          {"chi", q.chi},
          {"newick", tree_to_newick(quartet_tree(q))}};
      write_text(j.dump(2) + "\n", out);
      return 0;
    }
  } catch (const TreeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
