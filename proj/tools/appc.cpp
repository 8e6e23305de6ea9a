// Command-line front end: synthesize, simulate, verify, generate-grid,
// translate-ltl. Summary lines on stdout start with '#'; warnings go to
// stderr. Exit codes: 0 success, 1 internal error, 2 unsatisfiable,
// 3 parse or validation error, 4 verification found violations.

#include "appc/appc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace appc;

namespace {

enum ExitCode { exit_ok = 0, exit_internal = 1, exit_unsat = 2, exit_invalid = 3, exit_violations = 4 };

struct SpecArgs
{
    std::string model;
    std::string formula;
    std::string formula_file;
    std::string prop = default_surveillance_prop;
};

void add_spec_options(CLI::App* cmd, SpecArgs& a, bool need_model = true)
{
    auto* m = cmd->add_option("--model", a.model, "model file (JSON)");
    if (need_model)
        m->check(CLI::ExistingFile);
    auto* f = cmd->add_option("--formula", a.formula, "LTL formula");
    auto* ff = cmd->add_option("--formula-file", a.formula_file, "file containing the LTL formula")
                   ->check(CLI::ExistingFile);
    f->excludes(ff);
    cmd->add_option("--surveillance-prop", a.prop, "proposition marking surveillance states")
        ->capture_default_str();
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path.string(), 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ltl::Formula read_formula(const SpecArgs& a)
{
    if (!a.formula.empty())
        return ltl::parse(a.formula);
    if (!a.formula_file.empty())
        return ltl::parse(slurp(a.formula_file));
    throw ValidationError("one of --formula or --formula-file is required");
}

Model read_model(const SpecArgs& a)
{
    if (a.model.empty())
        throw ValidationError("--model is required");
    return load_model(a.model);
}

const PenaltyField& require_penalty(const Model& m)
{
    if (!m.penalty)
        throw ValidationError("model has no penalty section");
    return *m.penalty;
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

std::string join_ids(const Product& p, const std::vector<StateIndex>& states)
{
    std::string out;
    for (StateIndex v : states) {
        if (!out.empty())
            out += ' ';
        out += p.id(v);
    }
    return out;
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << '\n';
}

void print_synthesis(const Synthesis& syn)
{
    const Product& p = syn.product;
    std::cout << "# automaton_states " << p.ba().size() << '\n';
    std::cout << "# product_states " << p.size() << '\n';
    std::cout << "# product_transitions " << p.transition_count() << '\n';
    std::cout << "# asccs " << syn.components.size() << " excluded " << syn.excluded.size() << '\n';
    for (std::size_t c = 0; c < syn.components.size(); ++c) {
        const auto& comp = syn.components[c];
        std::cout << "# ascc " << c << " states " << comp.ascc.states.size() << " accepting "
                  << comp.ascc.accepting.size() << " surveillance " << comp.ascc.surveillance.size() << " appc "
                  << to_string(comp.cycle.appc_value) << (c == syn.chosen ? " chosen" : "") << '\n';
    }
    std::cout << "# v_star " << to_string(syn.vstar()) << '\n';
    std::cout << "# v_star_decimal " << to_decimal(syn.vstar()) << '\n';
    std::cout << "# cycle_length " << syn.cycle().cycle.states.size() << '\n';
    std::cout << "# cycle " << join_ids(p, syn.cycle().cycle.states) << '\n';
    std::vector<StateIndex> ts_cycle = project_run(p, syn.cycle().cycle).states;
    std::string ts_ids;
    for (StateIndex s : ts_cycle)
        ts_ids += (ts_ids.empty() ? "" : " ") + p.ts().id(s);
    std::cout << "# cycle_ts " << ts_ids << '\n';
}

nlohmann::json synthesis_report(const Synthesis& syn)
{
    const Product& p = syn.product;
    nlohmann::json j;
    j["v_star"] = to_string(syn.vstar());
    j["v_star_decimal"] = to_decimal(syn.vstar());
    std::vector<std::string> cyc;
    for (StateIndex v : syn.cycle().cycle.states)
        cyc.push_back(p.id(v));
    j["cycle"] = cyc;
    std::vector<std::size_t> pos = syn.cycle().surveillance_positions;
    j["surveillance_positions"] = pos;
    j["chosen_ascc"] = syn.chosen;
    std::vector<std::string> accepting;
    for (StateIndex v : syn.ascc().accepting)
        accepting.push_back(p.id(v));
    j["accepting"] = accepting;
    j["warnings"] = syn.warnings;
    return j;
}

struct SynthesizeArgs
{
    SpecArgs spec;
    std::string dump_product;
    std::string dump_reduced;
    std::string out_dir;
};

int cmd_synthesize(const SynthesizeArgs& a)
{
    Model model = read_model(a.spec);
    ltl::Formula f = read_formula(a.spec);
    Synthesis syn = synthesize(model.ts, require_penalty(model), f, a.spec.prop);
    print_warnings(syn.warnings);
    print_synthesis(syn);
    if (!a.dump_product.empty())
        write_json(a.dump_product, product_to_json(syn.product));
    if (!a.dump_reduced.empty())
        write_json(a.dump_reduced, reduced_to_json(syn));
    if (!a.out_dir.empty())
        write_json(fs::path(a.out_dir) / "synthesis.json", synthesis_report(syn));
    return exit_ok;
}

struct SimulateArgs
{
    SpecArgs spec;
    std::string config;
    std::size_t rounds = 20;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    std::string strategy = "offline";
    Weight visibility = 6;
    Weight horizon = 9;
    Weight weight_cap = 0;
    Weight split = 3;
    std::string backend = "dp";
    std::string out_dir = "results";
    std::string dump_product;
    std::string dump_reduced;
    bool strict = false;
    bool trace = false;
    unsigned threads = 0;
    std::size_t j_samples = 200;
    std::size_t j_cap = 10000;
};

PenaltyBackend parse_backend(const std::string& s)
{
    if (s == "dp")
        return PenaltyBackend::dp;
    if (s == "tableI" || s == "table")
        return PenaltyBackend::table;
    throw ValidationError("unknown penalty backend '" + s + "' (expected dp or tableI)");
}

/// Keys of the config file mirror the long flag names with '_' for '-'.
/// Flags given on the command line win over the file.
void apply_config(CLI::App* cmd, SimulateArgs& a)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(slurp(a.config));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed config file " + a.config + ": " + e.what(), 0, 0);
    }
    if (!doc.is_object())
        throw ParseError("config file must be a JSON object", 0, 0);
    auto given = [&](const std::string& key) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    for (const auto& [key, value] : doc.items()) {
        if (given(key))
            continue;
        try {
            if (key == "model")
                a.spec.model = value.get<std::string>();
            else if (key == "formula")
                a.spec.formula = value.get<std::string>();
            else if (key == "formula_file")
                a.spec.formula_file = value.get<std::string>();
            else if (key == "surveillance_prop")
                a.spec.prop = value.get<std::string>();
            else if (key == "rounds")
                a.rounds = value.get<std::size_t>();
            else if (key == "seed")
                a.seed = value.get<std::uint64_t>();
            else if (key == "replications")
                a.replications = value.get<std::size_t>();
            else if (key == "strategy")
                a.strategy = value.get<std::string>();
            else if (key == "visibility")
                a.visibility = value.get<Weight>();
            else if (key == "horizon")
                a.horizon = value.get<Weight>();
            else if (key == "weight_cap")
                a.weight_cap = value.get<Weight>();
            else if (key == "segment_split_factor")
                a.split = value.get<Weight>();
            else if (key == "penalty_backend")
                a.backend = value.get<std::string>();
            else if (key == "out_dir")
                a.out_dir = value.get<std::string>();
            else if (key == "strict_prop1")
                a.strict = value.get<bool>();
            else if (key == "trace")
                a.trace = value.get<bool>();
            else if (key == "threads")
                a.threads = value.get<unsigned>();
            else if (key == "j_samples")
                a.j_samples = value.get<std::size_t>();
            else if (key == "j_cap")
                a.j_cap = value.get<std::size_t>();
            else
                throw ParseError("unknown config key '" + key + "'", 0, 0);
        } catch (const nlohmann::json::exception&) {
            throw ParseError("config key '" + key + "' has the wrong type", 0, 0);
        }
    }
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    return out;
}

void print_strategy_summary(const Synthesis& syn, const ExperimentResult& res, StrategyKind k)
{
    auto runs = res.of(k);
    Rational sum = 0;
    std::size_t violations = 0, threshold = 0, total = 0, max_cycles = 0, within = 0;
    for (const auto* r : runs) {
        Rational final = r->sim.cumulative_appc(syn.penalty.rate());
        sum += final;
        violations += r->report.violations.size();
        Rational dev = final - syn.vstar();
        if (abs(dev) <= syn.vstar() * make_rational(15, 100))
            ++within;
        for (const auto& st : r->sim.rounds) {
            ++total;
            if (st.reason == ExitReason::threshold)
                ++threshold;
            max_cycles = std::max(max_cycles, st.cycles);
        }
        print_warnings(r->sim.warnings);
        for (const auto& v : r->report.violations)
            std::cerr << "violation (" << to_string(k) << ", replication " << r->replication << "): " << v << '\n';
    }
    Rational mean = runs.empty() ? Rational(0) : Rational(sum / static_cast<long>(runs.size()));
    std::cout << "# " << to_string(k) << " replications " << runs.size() << " mean_final_appc " << to_decimal(mean)
              << " within_15pct " << within << " threshold_exits " << threshold << '/' << total
              << " max_phase2_cycles " << max_cycles << " violations " << violations << '\n';
}

int cmd_simulate(CLI::App* cmd, SimulateArgs& a)
{
    if (!a.config.empty())
        apply_config(cmd, a);
    if (!fs::exists(a.spec.model))
        throw ValidationError("model file '" + a.spec.model + "' does not exist");
    Model model = read_model(a.spec);
    ltl::Formula f = read_formula(a.spec);

    ExperimentConfig cfg;
    cfg.rounds = a.rounds;
    cfg.seed = a.seed;
    cfg.replications = a.replications;
    if (a.replications < 1)
        throw ValidationError("--replications must be positive");
    if (a.strategy == "both")
        cfg.strategies = {StrategyKind::offline, StrategyKind::online};
    else
        cfg.strategies = {parse_strategy(a.strategy)};
    cfg.online.visibility = a.visibility;
    cfg.online.horizon = a.horizon;
    if (a.weight_cap > 0)
        cfg.online.weight_cap = a.weight_cap;
    if (a.split < 1)
        throw ValidationError("--segment-split-factor must be positive");
    cfg.online.segment_split_factor = a.split;
    cfg.online.backend = parse_backend(a.backend);
    cfg.strict = a.strict;
    cfg.j.samples = a.j_samples;
    cfg.j.cap = a.j_cap;
    if (a.j_samples < 1 || a.j_cap < 1)
        throw ValidationError("--j-samples and --j-cap must be positive");
    cfg.record_trace = a.trace;
    cfg.threads = a.threads;

    Synthesis syn = synthesize(model.ts, require_penalty(model), f, a.spec.prop);
    print_warnings(syn.warnings);
    print_synthesis(syn);
    if (!a.dump_product.empty())
        write_json(a.dump_product, product_to_json(syn.product));
    if (!a.dump_reduced.empty())
        write_json(a.dump_reduced, reduced_to_json(syn));
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_json(dir / "synthesis.json", synthesis_report(syn));
    if (cfg.rounds == 0)
        return exit_ok;

    ExperimentResult res = run_experiment(syn, cfg);
    std::size_t violations = 0;
    for (StrategyKind k : cfg.strategies) {
        const std::string name = to_string(k);
        auto rounds = open_out(dir / ("rounds_" + name + ".csv"));
        write_rounds_csv(rounds, res, k);
        auto summary = open_out(dir / ("summary_" + name + ".csv"));
        write_summary_csv(summary, syn, res, k);
        if (a.trace)
            for (const auto* r : res.of(k)) {
                auto trace = open_out(dir / ("trace_" + name + "_" + std::to_string(r->replication) + ".csv"));
                write_trace_csv(trace, syn, r->sim, k == StrategyKind::online);
            }
        print_strategy_summary(syn, res, k);
        for (const auto* r : res.of(k))
            violations += r->report.violations.size();
    }
    if (cfg.strategies.size() == 2) {
        auto off = res.of(StrategyKind::offline);
        auto on = res.of(StrategyKind::online);
        std::size_t wins = 0;
        Rational diff = 0;
        for (std::size_t i = 0; i < off.size(); ++i) {
            Rational a_off = off[i]->sim.cumulative_appc(syn.penalty.rate());
            Rational a_on = on[i]->sim.cumulative_appc(syn.penalty.rate());
            if (a_on <= a_off)
                ++wins;
            diff += a_on - a_off;
        }
        diff /= static_cast<long>(off.size());
        std::cout << "# paired online_le_offline " << wins << '/' << off.size() << " mean_difference "
                  << to_decimal(diff) << '\n';
    }
    std::cout << "# out_dir " << dir.string() << '\n';
    return violations == 0 ? exit_ok : exit_violations;
}

struct VerifyArgs
{
    SpecArgs spec;
    std::string trace;
    long rounds = -1;
};

int cmd_verify(const VerifyArgs& a)
{
    Model model = read_model(a.spec);
    ltl::Formula f = read_formula(a.spec);
    Synthesis syn = synthesize(model.ts, require_penalty(model), f, a.spec.prop);
    print_warnings(syn.warnings);
    const OfflinePlan plan = build_offline_plan(syn);

    std::istringstream in(slurp(a.trace));
    std::string header;
    std::getline(in, header);
    std::vector<std::string> columns;
    {
        std::stringstream hs(header);
        for (std::string c; std::getline(hs, c, ',');)
            columns.push_back(c);
    }
    auto col = [&](const std::string& name) -> std::size_t {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end())
            throw ParseError("trace has no '" + name + "' column", 1, 0);
        return static_cast<std::size_t>(it - columns.begin());
    };
    const std::size_t state_col = col("product_state");
    const std::size_t round_col = col("round");
    std::vector<StateIndex> run;
    std::vector<std::string> violations;
    std::size_t last_round = 0, line = 1;
    for (std::string row; std::getline(in, row);) {
        ++line;
        if (row.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream rs(row);
        for (std::string c; std::getline(rs, c, ',');)
            cells.push_back(c);
        if (cells.size() <= std::max(state_col, round_col))
            throw ParseError("short trace row", line, 0);
        if (auto v = syn.product.index_of(cells[state_col])) {
            run.push_back(*v);
        } else {
            // out of range sentinel, reported by the checker
            run.push_back(static_cast<StateIndex>(syn.product.size()));
            violations.push_back("line " + std::to_string(line) + ": '" + cells[state_col] +
                                 "' is not a state of the product");
        }
        try {
            last_round = std::stoul(cells[round_col]);
        } catch (const std::exception&) {
            throw ParseError("bad round value '" + cells[round_col] + "'", line, 0);
        }
    }
    const std::size_t rounds = a.rounds >= 0 ? static_cast<std::size_t>(a.rounds) : last_round;
    SatisfactionReport rep = verify_satisfaction(syn, plan, run, rounds);
    violations.insert(violations.end(), rep.violations.begin(), rep.violations.end());
    for (const auto& v : violations)
        std::cout << "violation: " << v << '\n';
    std::cout << "# steps " << run.size() << '\n';
    std::cout << "# rounds " << rounds << '\n';
    std::cout << "# accepting_visits " << rep.accepting_visits << '\n';
    std::cout << "# violations " << violations.size() << '\n';
    return violations.empty() ? exit_ok : exit_violations;
}

Cell parse_cell(const std::string& s)
{
    auto comma = s.find(',');
    try {
        if (comma == std::string::npos)
            throw std::invalid_argument(s);
        std::size_t used = 0;
        int r = std::stoi(s.substr(0, comma), &used);
        if (used != comma)
            throw std::invalid_argument(s);
        int c = std::stoi(s.substr(comma + 1), &used);
        if (used != s.size() - comma - 1)
            throw std::invalid_argument(s);
        return Cell{r, c};
    } catch (const std::exception&) {
        throw ValidationError("cell '" + s + "' must be written row,col");
    }
}

struct GridArgs
{
    bool case_study = false;
    int width = 0;
    int height = 0;
    std::string stock_a, stock_b, base;
    std::vector<std::string> unsafe;
    unsigned rate = 5;
    std::string prob = "1/2";
    std::string out;
};

int cmd_generate_grid(const GridArgs& a)
{
    GridSpec g;
    if (a.case_study) {
        g = case_study_grid_spec();
    } else {
        if (a.width <= 0 || a.height <= 0 || a.stock_a.empty() || a.stock_b.empty() || a.base.empty())
            throw ValidationError("--width, --height, --stock-a, --stock-b and --base are required without --case-study");
        g.width = a.width;
        g.height = a.height;
        g.stock_a = parse_cell(a.stock_a);
        g.stock_b = parse_cell(a.stock_b);
        g.base = parse_cell(a.base);
        for (const auto& u : a.unsafe)
            g.unsafe.insert(parse_cell(u));
        g.rate = a.rate;
        try {
            g.default_prob = parse_rational(a.prob);
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
    }
    GridWorld w = generate_grid(g);
    const std::string text = model_to_json(w.ts, &w.penalty).dump(1) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        if (fs::path(a.out).has_parent_path())
            fs::create_directories(fs::path(a.out).parent_path());
        auto os = open_out(a.out);
        os << text;
        std::cout << "# states " << w.ts.size() << '\n';
        std::cout << "# transitions " << w.ts.transition_count() << '\n';
        std::cout << "# formula " << case_study_formula << '\n';
    }
    return exit_ok;
}

struct TranslateArgs
{
    SpecArgs spec;
    std::string dump;
};

int cmd_translate(const TranslateArgs& a)
{
    ltl::Formula f = read_formula(a.spec);
    BuchiAutomaton ba = to_buchi(f);
    std::cout << "# formula " << ltl::to_string(f) << '\n';
    std::cout << "# atoms " << ba.atoms.size() << '\n';
    std::cout << "# states " << ba.size() << '\n';
    std::cout << "# transitions " << ba.transition_count() << '\n';
    std::cout << "# accepting " << ba.accepting_count() << '\n';
    if (!a.dump.empty())
        write_json(a.dump, buchi_to_json(ba));
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"APPC-minimizing control synthesis for surveillance specifications"};
    app.require_subcommand(1);

    SynthesizeArgs syn_args;
    auto* syn_cmd = app.add_subcommand("synthesize", "compute the optimal cycle and its APPC value");
    add_spec_options(syn_cmd, syn_args.spec);
    syn_cmd->add_option("--dump-product", syn_args.dump_product, "write the product automaton as JSON");
    syn_cmd->add_option("--dump-reduced", syn_args.dump_reduced, "write the reduced systems as JSON");
    syn_cmd->add_option("--out-dir", syn_args.out_dir, "write synthesis.json here");
    std::string unused_backend;
    syn_cmd->add_option("--penalty-backend", unused_backend, "accepted for symmetry with simulate; unused");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "run strategies against the stochastic penalty field");
    add_spec_options(sim_cmd, sim_args.spec, false);
    sim_cmd->add_option("--config", sim_args.config, "JSON file with defaults for these flags")
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--rounds", sim_args.rounds, "rounds per replication")->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed, "master seed")->capture_default_str();
    sim_cmd->add_option("--replications", sim_args.replications, "independent replications")->capture_default_str();
    sim_cmd->add_option("--strategy", sim_args.strategy, "offline, online or both")
        ->check(CLI::IsMember({"offline", "online", "both"}))
        ->capture_default_str();
    sim_cmd->add_option("--visibility", sim_args.visibility, "sensing radius (weighted distance)")
        ->capture_default_str();
    sim_cmd->add_option("--horizon", sim_args.horizon, "planning horizon (time units)")->capture_default_str();
    sim_cmd->add_option("--weight-cap", sim_args.weight_cap, "candidate run weight cap (0: twice the horizon)");
    sim_cmd->add_option("--segment-split-factor", sim_args.split,
                        "split cycle segments heavier than this many horizons")
        ->capture_default_str();
    sim_cmd->add_option("--penalty-backend", sim_args.backend, "dp or tableI")
        ->check(CLI::IsMember({"dp", "tableI", "table"}))
        ->capture_default_str();
    sim_cmd->add_option("--out-dir", sim_args.out_dir, "directory for CSV outputs")->capture_default_str();
    sim_cmd->add_option("--dump-product", sim_args.dump_product, "write the product automaton as JSON");
    sim_cmd->add_option("--dump-reduced", sim_args.dump_reduced, "write the reduced systems as JSON");
    sim_cmd->add_flag("--strict-prop1", sim_args.strict, "end phase 2 only after max(j, i*k) cycles");
    sim_cmd->add_flag("--trace", sim_args.trace, "write per-step trace CSVs");
    sim_cmd->add_option("--threads", sim_args.threads, "worker threads (0: all cores)");
    sim_cmd->add_option("--j-samples", sim_args.j_samples, "samples per cycle-count estimate")->capture_default_str();
    sim_cmd->add_option("--j-cap", sim_args.j_cap, "largest cycle count tried by the estimate")
        ->capture_default_str();

    VerifyArgs ver_args;
    auto* ver_cmd = app.add_subcommand("verify", "check an executed trace against the specification");
    add_spec_options(ver_cmd, ver_args.spec);
    ver_cmd->add_option("--trace", ver_args.trace, "trace CSV written by simulate --trace")
        ->required()
        ->check(CLI::ExistingFile);
    ver_cmd->add_option("--rounds", ver_args.rounds, "completed rounds (default: last round in the trace)");

    GridArgs grid_args;
    auto* grid_cmd = app.add_subcommand("generate-grid", "write an 8-connected grid-world model");
    grid_cmd->add_flag("--case-study", grid_args.case_study, "the shipped package-transport layout");
    grid_cmd->add_option("--width", grid_args.width, "columns");
    grid_cmd->add_option("--height", grid_args.height, "rows");
    grid_cmd->add_option("--stock-a", grid_args.stock_a, "row,col of the first stock");
    grid_cmd->add_option("--stock-b", grid_args.stock_b, "row,col of the second stock");
    grid_cmd->add_option("--base", grid_args.base, "row,col of the base (initial state)");
    grid_cmd->add_option("--unsafe", grid_args.unsafe, "row,col of an unsafe cell (repeatable)");
    grid_cmd->add_option("--rate", grid_args.rate, "penalty rate")->capture_default_str();
    grid_cmd->add_option("--prob", grid_args.prob, "penalty probability of every cell")->capture_default_str();
    grid_cmd->add_option("--out", grid_args.out, "output file (default: stdout)");

    TranslateArgs tr_args;
    auto* tr_cmd = app.add_subcommand("translate-ltl", "translate a formula to a Buchi automaton");
    add_spec_options(tr_cmd, tr_args.spec, false);
    tr_cmd->add_option("--dump", tr_args.dump, "write the automaton as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (*syn_cmd)
            return cmd_synthesize(syn_args);
        if (*sim_cmd)
            return cmd_simulate(sim_cmd, sim_args);
        if (*ver_cmd)
            return cmd_verify(ver_args);
        if (*grid_cmd)
            return cmd_generate_grid(grid_args);
        if (*tr_cmd)
            return cmd_translate(tr_args);
    } catch (const UnsatisfiableError& e) {
        std::cerr << "unsatisfiable: " << e.what() << '\n';
        return exit_unsat;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_internal;
}
