#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stegokit/analysis.hpp"
#include "stegokit/bits.hpp"
#include "stegokit/channel.hpp"
#include "stegokit/errors.hpp"
#include "stegokit/extractor.hpp"
#include "stegokit/otstego.hpp"
#include "stegokit/stream.hpp"

namespace {

using namespace stegokit;

std::mt19937_64 make_rng(bool seeded, std::uint64_t seed) {
    if (seeded)
        return std::mt19937_64(seed);
    std::random_device rd;
    std::seed_seq sq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(sq);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw input_error("cannot write file: " + path);
    out << content;
    if (!out.flush())
        throw input_error("cannot write file: " + path);
}

BitVec read_bits_file(const std::string& path) {
    std::istringstream is(read_file(path));
    std::string line;
    std::getline(is, line);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
        line.pop_back();
    return BitVec::from_bits_string(line);
}

History read_history_file(const std::string& path, const ChannelModel& c) {
    std::istringstream is(read_file(path));
    History h;
    std::string token;
    while (is >> token)
        h.push_back(c.symbol_index(token));
    return h;
}

std::string history_text(const History& h, const ChannelModel& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i)
            os << ' ';
        os << c.alphabet()[h[i]];
    }
    os << '\n';
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void emit_report(const std::string& report, const std::string& out_path) {
    std::cout << report;
    if (!out_path.empty())
        write_file(out_path, report);
}

// Analysis instance file: channel (path or inline object), nu, and optional
// c/eps/rho overrides plus a starting history.
struct AnalyzeSetup {
    ChannelModel channel;
    ParamSet params;
    History history;
    std::string description;
};

AnalyzeSetup load_setup(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("instance file is not valid JSON: ") + e.what());
    }
    try {
        ChannelModel channel = j.at("channel").is_string()
                                   ? ChannelModel::load_file(j.at("channel").get<std::string>())
                                   : ChannelModel::load(j.at("channel").dump());
        int nu = j.at("nu").get<int>();
        int c = j.value("c", 4);
        std::optional<double> eps;
        if (j.contains("eps"))
            eps = j.at("eps").get<double>();
        std::optional<long long> rho;
        if (j.contains("rho"))
            rho = j.at("rho").get<long long>();
        AnalyzeSetup setup{std::move(channel), ParamSet{}, History{},
                           j.value("description", path)};
        setup.params = derive_params(nu, c, setup.channel.declared_min_entropy(),
                                     setup.channel.bits_per_symbol(), eps, rho);
        if (j.contains("history"))
            for (const auto& sym : j.at("history"))
                setup.history.push_back(setup.channel.symbol_index(sym.get<std::string>()));
        return setup;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed instance file: ") + e.what());
    }
}

// Extractor instance file: n, k, m, optional declared eps and an explicit
// source (2^n decimal strings); default source is flat on the first 2^k
// inputs.
struct ExtractorSetup {
    ExtractorParams params;
    DistQ source;
    std::string description;
};

ExtractorSetup load_extractor_setup(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("instance file is not valid JSON: ") + e.what());
    }
    try {
        int n = j.at("n").get<int>();
        int k = j.at("k").get<int>();
        int m = j.at("m").get<int>();
        double eps = j.value("eps", std::pow(2.0, -0.5 * (k - m)));
        ExtractorSetup setup;
        setup.params = make_extractor_params(n, k, m, eps);
        setup.description = j.value("description", path);
        if (n > 24)
            throw cap_error("extractor source enumeration too large");
        if (j.contains("source")) {
            for (const auto& p : j.at("source")) {
                if (!p.is_string())
                    throw input_error("source masses must be decimal strings");
                setup.source.mass.push_back(rat_from_decimal(p.get<std::string>()));
            }
            if (setup.source.size() != std::size_t(1) << n)
                throw input_error("source must list 2^n masses");
            setup.source.validate();
        } else {
            setup.source = DistQ(std::size_t(1) << n);
            Rat u = rat_dyadic(1, static_cast<unsigned>(k));
            for (std::uint64_t x = 0; x < (std::uint64_t(1) << k); ++x)
                setup.source.mass[x] = u;
        }
        return setup;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed instance file: ") + e.what());
    }
}

int cmd_keygen(const std::string& channel_path, int nu, int c, double eps, long long rho,
               const std::string& out_path, bool seeded, std::uint64_t seed) {
    ChannelModel channel = ChannelModel::load_file(channel_path);
    std::optional<double> eps_opt;
    if (eps >= 0)
        eps_opt = eps;
    std::optional<long long> rho_opt;
    if (rho >= 0)
        rho_opt = rho;
    ParamSet params = derive_params(nu, c, channel.declared_min_entropy(),
                                    channel.bits_per_symbol(), eps_opt, rho_opt);
    std::mt19937_64 rng = make_rng(seeded, seed);
    StegoKey key = keygen(params, rng);
    save_key(key, out_path);
    std::cout << "wrote " << out_path << ": nu=" << params.nu << " blocks=" << params.ell
              << "x" << params.block_bits << "b t=" << params.t << " rho=" << params.rho
              << " eps=" << params.eps_sec << " seed_bits=" << params.extractor.d << "\n";
    return 0;
}

int cmd_embed(const std::string& key_path, const std::string& message_path,
              const std::string& channel_path, const std::string& history_path,
              const std::string& history_out, const std::string& out_path, bool seeded,
              std::uint64_t seed, bool verbose) {
    StegoKey key = load_key(key_path);
    ChannelModel channel = ChannelModel::load_file(channel_path);
    BitVec message = read_bits_file(message_path);
    History h;
    if (!history_path.empty())
        h = read_history_file(history_path, channel);
    std::mt19937_64 rng = make_rng(seeded, seed);
    std::vector<long long> rounds;
    Stegotext st = se_encode(key, message, channel, h, rng, &rounds);
    save_stegotext(st, channel, out_path);
    if (!history_out.empty())
        write_file(history_out, history_text(h, channel));
    std::cout << "wrote " << out_path << ": " << st.symbols.size() << " symbols\n";
    if (verbose) {
        std::cout << "draws per block:";
        for (long long r : rounds)
            std::cout << ' ' << r;
        std::cout << "\n";
    }
    return 0;
}

int cmd_extract(const std::string& key_path, const std::string& stego_path,
                const std::string& channel_path, const std::string& out_path) {
    StegoKey key = load_key(key_path);
    ChannelModel channel = ChannelModel::load_file(channel_path);
    Stegotext st = load_stegotext(stego_path, channel, key.params);
    BitVec message = sd_decode(key, st);
    write_file(out_path, message.to_bits_string() + "\n");
    std::cout << "wrote " << out_path << ": " << message.size() << " bits\n";
    return 0;
}

int cmd_check_channel(const std::string& channel_path) {
    ChannelModel channel = ChannelModel::load_file(channel_path);
    std::cout << "channel ok: " << channel.alphabet_size() << " symbols, order "
              << channel.order() << ", declared min-entropy " << channel.declared_min_entropy()
              << " bits/symbol\n";
    return 0;
}

int cmd_analyze_distance(const std::string& instance_path, const std::string& out_path,
                         bool seeded, std::uint64_t seed, int max_enum_seeds,
                         std::uint64_t sample_seeds) {
    auto start = std::chrono::steady_clock::now();
    AnalyzeSetup setup = load_setup(instance_path);
    std::mt19937_64 rng = make_rng(seeded, seed);
    DistanceEstimate est = seed_averaged_stego_distance(setup.params, setup.channel,
                                                        setup.history, rng, max_enum_seeds,
                                                        sample_seeds);
    SecurityBound bound = security_bound(setup.params);
    double measured = rat_to_double(est.value);
    bool pass = measured <= bound.value + (est.exact ? 0.0 : est.ci_halfwidth);
    std::map<std::string, std::string> extra{
        {"exact", est.exact ? "true" : "false"},
        {"seeds", std::to_string(est.seeds_used)},
        {"ci_halfwidth", std::to_string(est.ci_halfwidth)},
        {"bound_vacuous", bound.vacuous ? "true" : "false"},
    };
    emit_report(render_report("distance", setup.description, measured, bound.value, pass,
                              est.seeds_used, seconds_since(start), extra),
                out_path);
    return pass ? 0 : 1;
}

int cmd_analyze_soundness(const std::string& instance_path, const std::string& out_path,
                          bool seeded, std::uint64_t seed, std::uint64_t trials) {
    auto start = std::chrono::steady_clock::now();
    AnalyzeSetup setup = load_setup(instance_path);
    std::mt19937_64 rng = make_rng(seeded, seed);
    SoundnessReport r = measure_soundness(setup.params, setup.channel, trials, rng);
    std::map<std::string, std::string> extra{
        {"failures", std::to_string(r.failures)},
        {"sigma", std::to_string(r.sigma)},
    };
    if (setup.params.rho == 0)
        extra["expected_failure"] = std::to_string(rho0_failure_exact(setup.params));
    if (setup.params.c == 4)
        extra["closed_form_bound"] = std::to_string(soundness_bound_c4(setup.params.nu));
    emit_report(render_report("soundness", setup.description, r.measured, r.bound, r.pass,
                              r.trials, seconds_since(start), extra),
                out_path);
    return r.pass ? 0 : 1;
}

int cmd_analyze_game(const std::string& instance_path, const std::string& out_path,
                     bool seeded, std::uint64_t seed, std::uint64_t trials,
                     const std::string& adversary_name) {
    auto start = std::chrono::steady_clock::now();
    AnalyzeSetup setup = load_setup(instance_path);
    std::mt19937_64 rng = make_rng(seeded, seed);
    std::unique_ptr<WardenAdversary> adversary;
    if (adversary_name == "random")
        adversary = make_random_adversary();
    else if (adversary_name == "likelihood")
        adversary = make_likelihood_adversary();
    else if (adversary_name == "key-informed")
        adversary = make_key_informed_adversary();
    else
        throw input_error("unknown adversary: " + adversary_name);

    GameResult g = run_warden_game(setup.params, setup.channel, *adversary, trials, rng);
    double sigma = g.confidence_halfwidth / 1.96;
    std::map<std::string, std::string> extra{
        {"adversary", adversary_name},
        {"successes", std::to_string(g.successes)},
        {"ci_halfwidth", std::to_string(g.confidence_halfwidth)},
    };
    double bound = 0;
    bool pass = true;
    if (adversary_name == "random") {
        bound = g.confidence_halfwidth;
        pass = g.advantage_estimate <= bound;
    } else if (adversary_name == "likelihood") {
        DistanceEstimate est =
            seed_averaged_stego_distance(setup.params, setup.channel, setup.history, rng);
        double target = 0.5 * rat_to_double(est.value);
        bound = target + 3.0 * sigma + (est.exact ? 0.0 : est.ci_halfwidth);
        pass = std::fabs(g.advantage_estimate - target) <=
               3.0 * sigma + (est.exact ? 0.0 : est.ci_halfwidth);
        extra["half_distance"] = std::to_string(target);
    } else {
        bound = 0.5; // information-theoretic ceiling of any advantage
    }
    emit_report(render_report("game", setup.description, g.advantage_estimate, bound, pass,
                              g.trials, seconds_since(start), extra),
                out_path);
    return pass ? 0 : 1;
}

int cmd_analyze_extractor(const std::string& instance_path, const std::string& out_path,
                          bool seeded, std::uint64_t seed, int max_enum_seeds) {
    auto start = std::chrono::steady_clock::now();
    ExtractorSetup setup = load_extractor_setup(instance_path);
    const ExtractorParams& p = setup.params;
    Rat joint = verify_strong_extractor(p, setup.source);
    // Leftover-hash guarantee: joint distance <= 0.5 * sqrt(2^(m-k)), tested
    // exactly as distance^2 <= 2^(m-k-2); the per-seed tail uses the same
    // quantity as tau^4 (tau = sqrt of the bound).
    Rat bound_sq = rat_dyadic(1, static_cast<unsigned>(p.k - p.m + 2));
    bool joint_pass = Rat(joint * joint) <= bound_sq;

    std::mt19937_64 rng = make_rng(seeded, seed);
    SeedQuality q = seed_quality_histogram(p, setup.source, bound_sq, rng, max_enum_seeds);
    Rat frac_sq(q.fraction * q.fraction);
    bool tail_pass;
    if (q.exact) {
        tail_pass = Rat(frac_sq * frac_sq) <= bound_sq;
    } else {
        double tau = std::pow(rat_to_double(bound_sq), 0.25);
        tail_pass = rat_to_double(q.fraction) <= tau + q.ci_halfwidth;
    }
    bool pass = joint_pass && tail_pass;
    std::map<std::string, std::string> extra{
        {"seed_fraction", std::to_string(rat_to_double(q.fraction))},
        {"seed_fraction_exact", q.exact ? "true" : "false"},
        {"seeds_checked", std::to_string(q.seeds_checked)},
        {"joint_pass", joint_pass ? "true" : "false"},
        {"tail_pass", tail_pass ? "true" : "false"},
    };
    emit_report(render_report("extractor", setup.description, rat_to_double(joint),
                              0.5 * std::pow(2.0, 0.5 * (p.m - p.k)), pass, q.seeds_checked,
                              seconds_since(start), extra),
                out_path);
    return pass ? 0 : 1;
}

int cmd_session_init(const std::string& channel_path, const std::string& master_hex, int c,
                     double eps, long long rho, const std::string& out_path, bool seeded,
                     std::uint64_t seed) {
    ChannelModel channel = ChannelModel::load_file(channel_path);
    BitVec master;
    if (!master_hex.empty()) {
        master = BitVec::from_hex(master_hex, kMasterBits);
    } else {
        std::mt19937_64 rng = make_rng(seeded, seed);
        master = BitVec::random(kMasterBits, rng);
    }
    StreamConfig config;
    config.c = c;
    if (eps >= 0)
        config.eps_sec = eps;
    if (rho >= 0)
        config.rho = rho;
    StreamSession sess = make_session(master, config);
    save_session(sess, channel, out_path);
    std::cout << "wrote " << out_path << ": fresh session, 256-bit master\n";
    return 0;
}

int cmd_stream_embed(const std::string& session_path, const std::string& message_path,
                     const std::string& channel_path, const std::string& out_path, bool seeded,
                     std::uint64_t seed) {
    ChannelModel channel = ChannelModel::load_file(channel_path);
    StreamSession sess = load_session(session_path, channel);
    BitVec message = read_bits_file(message_path);
    std::mt19937_64 rng = make_rng(seeded, seed);
    Stegotext st = stream_encode(sess, message, channel, rng);
    save_stegotext(st, channel, out_path);
    save_session(sess, channel, session_path);
    std::cout << "wrote " << out_path << ": " << st.symbols.size()
              << " symbols; session advanced to n=" << sess.prg.n_consumed << "\n";
    return 0;
}

int cmd_stream_extract(const std::string& session_path, const std::string& stego_path,
                       const std::string& channel_path, int nu, const std::string& out_path) {
    ChannelModel channel = ChannelModel::load_file(channel_path);
    StreamSession sess = load_session(session_path, channel);
    ParamSet params = stream_params(sess, nu, channel);
    Stegotext st = load_stegotext(stego_path, channel, params);
    BitVec message = stream_decode(sess, st, nu, channel);
    write_file(out_path, message.to_bits_string() + "\n");
    save_session(sess, channel, session_path);
    std::cout << "wrote " << out_path << ": " << message.size()
              << " bits; session advanced to n=" << sess.prg.n_consumed << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"one-time stegosystem over history-dependent channels"};
    app.require_subcommand(1);

    std::uint64_t rng_seed = 0;
    std::string channel_path, key_path, message_path, stego_path, history_path, history_out;
    std::string out_path, instance_path, session_path, master_hex, adversary = "random";
    int nu = 0, c_const = 4, max_enum_seeds = 16;
    double eps = -1;
    long long rho = -1;
    std::uint64_t trials = 0, sample_seeds = 256;
    bool verbose = false;

    auto add_rng = [&](CLI::App* cmd) {
        return cmd->add_option("--rng-seed", rng_seed,
                               "Deterministic RNG seed (bit-reproducible runs)");
    };

    CLI::App* kg = app.add_subcommand("keygen", "Derive parameters and generate a key");
    kg->add_option("--nu", nu, "Message length in bits")->required();
    kg->add_option("--channel", channel_path, "Channel description file")->required();
    kg->add_option("--c", c_const, "Block-size constant")->capture_default_str();
    kg->add_option("--eps", eps, "Override the per-block slack eps");
    kg->add_option("--rho", rho, "Override the retry bound rho");
    kg->add_option("--out", out_path, "Key file to write")->required();
    auto* kg_seed = add_rng(kg);

    CLI::App* em = app.add_subcommand("embed", "Embed a message into channel symbols");
    em->add_option("--key", key_path, "Key file")->required();
    em->add_option("--message", message_path, "Message bits file ('0'/'1' line)")->required();
    em->add_option("--channel", channel_path, "Channel description file")->required();
    em->add_option("--history", history_path, "Starting history file");
    em->add_option("--history-out", history_out, "Write the advanced history here");
    em->add_option("--out", out_path, "Stegotext file to write")->required();
    em->add_flag("-v,--verbose", verbose, "Print per-block draw counts");
    auto* em_seed = add_rng(em);

    CLI::App* ex = app.add_subcommand("extract", "Decode a stegotext back to message bits");
    ex->add_option("--key", key_path, "Key file")->required();
    ex->add_option("--stegotext", stego_path, "Stegotext file")->required();
    ex->add_option("--channel", channel_path, "Channel description file (symbol names)")
        ->required();
    ex->add_option("--out", out_path, "Message bits file to write")->required();

    CLI::App* cc = app.add_subcommand("check-channel", "Validate a channel description");
    cc->add_option("--channel", channel_path, "Channel description file")->required();

    CLI::App* an = app.add_subcommand("analyze", "Verification harness");
    an->require_subcommand(1);

    CLI::App* ad = an->add_subcommand("distance",
                                      "Exact embedder-vs-covertext statistical distance");
    ad->add_option("--instance", instance_path, "Instance description file")->required();
    ad->add_option("--out", out_path, "Report file");
    ad->add_option("--max-enum-seeds", max_enum_seeds,
                   "Enumerate all seeds up to this log2 count")->capture_default_str();
    ad->add_option("--sample-seeds", sample_seeds, "Seeds to sample beyond that")->capture_default_str();
    auto* ad_seed = add_rng(ad);

    CLI::App* as = an->add_subcommand("soundness", "Monte Carlo decode-failure rate");
    as->add_option("--instance", instance_path, "Instance description file")->required();
    as->add_option("--out", out_path, "Report file");
    as->add_option("--trials", trials, "Round-trip trials")->default_val(10000);
    auto* as_seed = add_rng(as);

    CLI::App* ag = an->add_subcommand("game", "Hidden-coin distinguishing game");
    ag->add_option("--instance", instance_path, "Instance description file")->required();
    ag->add_option("--out", out_path, "Report file");
    ag->add_option("--trials", trials, "Game trials")->default_val(1000);
    ag->add_option("--adversary", adversary, "random | likelihood | key-informed")->capture_default_str();
    auto* ag_seed = add_rng(ag);

    CLI::App* ae = an->add_subcommand("extractor", "Exact extractor-quality census");
    ae->add_option("--instance", instance_path, "Extractor instance file")->required();
    ae->add_option("--out", out_path, "Report file");
    ae->add_option("--max-enum-seeds", max_enum_seeds,
                   "Enumerate all seeds up to this log2 count")->capture_default_str();
    auto* ae_seed = add_rng(ae);

    CLI::App* si = app.add_subcommand("session-init", "Create a long-lived stream session");
    si->add_option("--channel", channel_path, "Channel description file")->required();
    si->add_option("--master", master_hex, "Master key as 64 hex digits (default: random)");
    si->add_option("--c", c_const, "Block-size constant for derived parameters")->capture_default_str();
    si->add_option("--eps", eps, "Override the per-block slack eps");
    si->add_option("--rho", rho, "Override the retry bound rho");
    si->add_option("--out", out_path, "Session file to write")->required();
    auto* si_seed = add_rng(si);

    CLI::App* se = app.add_subcommand("stream-embed",
                                      "Embed the next message in a stream session");
    se->add_option("--session", session_path, "Session file (updated in place)")->required();
    se->add_option("--message", message_path, "Message bits file")->required();
    se->add_option("--channel", channel_path, "Channel description file")->required();
    se->add_option("--out", out_path, "Stegotext file to write")->required();
    auto* se_seed = add_rng(se);

    CLI::App* sx = app.add_subcommand("stream-extract",
                                      "Decode the next message in a stream session");
    sx->add_option("--session", session_path, "Session file (updated in place)")->required();
    sx->add_option("--stegotext", stego_path, "Stegotext file")->required();
    sx->add_option("--channel", channel_path, "Channel description file")->required();
    sx->add_option("--nu", nu, "Message length in bits")->required();
    sx->add_option("--out", out_path, "Message bits file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (kg->parsed())
        return cmd_keygen(channel_path, nu, c_const, eps, rho, out_path,
                          kg_seed->count() > 0, rng_seed);
    if (em->parsed())
        return cmd_embed(key_path, message_path, channel_path, history_path, history_out,
                         out_path, em_seed->count() > 0, rng_seed, verbose);
    if (ex->parsed())
        return cmd_extract(key_path, stego_path, channel_path, out_path);
    if (cc->parsed())
        return cmd_check_channel(channel_path);
    if (an->parsed()) {
        if (ad->parsed())
            return cmd_analyze_distance(instance_path, out_path, ad_seed->count() > 0,
                                        rng_seed, max_enum_seeds, sample_seeds);
        if (as->parsed())
            return cmd_analyze_soundness(instance_path, out_path, as_seed->count() > 0,
                                         rng_seed, trials);
        if (ag->parsed())
            return cmd_analyze_game(instance_path, out_path, ag_seed->count() > 0, rng_seed,
                                    trials, adversary);
        if (ae->parsed())
            return cmd_analyze_extractor(instance_path, out_path, ae_seed->count() > 0,
                                         rng_seed, max_enum_seeds);
    }
    if (si->parsed())
        return cmd_session_init(channel_path, master_hex, c_const, eps, rho, out_path,
                                si_seed->count() > 0, rng_seed);
    if (se->parsed())
        return cmd_stream_embed(session_path, message_path, channel_path, out_path,
                                se_seed->count() > 0, rng_seed);
    if (sx->parsed())
        return cmd_stream_extract(session_path, stego_path, channel_path, nu, out_path);
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mismatch_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cap_error& e) {
        std::cerr << "error: " << e.what() << " (shrink the instance)\n";
        return 4;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
