#include "escape/advisor.hpp"
#include "escape/beck.hpp"
#include "escape/blocks.hpp"
#include "escape/dioph.hpp"
#include "escape/errors.hpp"
#include "escape/game.hpp"
#include "escape/miller.hpp"
#include "escape/rational.hpp"
#include "escape/squarefree.hpp"
#include "escape/wordio.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace {

using namespace escape;

// Engine-facing options shared by the `gen` subcommands.
struct EngineFlags {
    bool paranoid = false;
    bool prune_subsumed = false;
    bool transcript = false;
    std::string output = "-";
};

void add_engine_flags(CLI::App* cmd, EngineFlags& flags) {
    cmd->add_flag("--paranoid", flags.paranoid,
                  "recompute the ledger weight from scratch every step");
    cmd->add_flag("--prune-subsumed", flags.prune_subsumed,
                  "drop explicit obstructions below explicit ancestors");
    cmd->add_flag("--transcript", flags.transcript,
                  "write one 'step ...' line per move to standard error");
    cmd->add_option("--output", flags.output,
                    "output path, or - for standard output");
}

struct TranscriptSink {
    std::vector<std::string> lines;
    game::EngineOptions options(const EngineFlags& flags) {
        game::EngineOptions opts;
        opts.paranoid = flags.paranoid;
        opts.prune_subsumed = flags.prune_subsumed;
        if (flags.transcript)
            opts.transcript = &lines;
        return opts;
    }
    ~TranscriptSink() {
        for (const auto& line : lines)
            std::cerr << line << "\n";
    }
};

void emit(const EngineFlags& flags, const std::string& payload) {
    if (flags.output == "-") {
        std::cout << payload;
        return;
    }
    std::ofstream out(flags.output, std::ios::binary);
    if (!out)
        throw ParseError("cannot open output file: " + flags.output);
    out << payload;
}

std::string slurp(const std::string& path) {
    if (path == "-")
        return wordio::read_stream(std::cin);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open input file: " + path);
    return wordio::read_stream(in);
}

std::string decimal(const Rat& value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6) << value.get_d();
    return out.str();
}

int report_and_exit_code(const nlohmann::json& report) {
    std::cout << report.dump() << "\n";
    return report.at("ok").get<bool>() ? 0 : 1;
}

// --- gen ------------------------------------------------------------------

struct MillerGenOpts {
    std::string factors;
    int alphabet = 2;
    std::string beta;
    size_t length = 0;
    EngineFlags flags;
};

int run_gen_miller(const MillerGenOpts& o) {
    miller::MillerSpec spec{o.alphabet, wordio::read_factor_file(o.factors),
                            parse_rational(o.beta)};
    const Rat omega = miller::certify(spec);
    std::cerr << "certified: omega = " << rat_str(omega)
              << ", beta*(1+omega) = " << rat_str(spec.beta * (1 + omega))
              << " <= " << o.alphabet << "\n";
    TranscriptSink sink;
    auto word = miller::generate(spec, o.length, sink.options(o.flags));
    emit(o.flags, wordio::render_word(word) + "\n");
    return 0;
}

struct SquarefreeGenOpts {
    std::string lists;
    size_t length = 0;
    bool reference = false;
    EngineFlags flags;
};

std::unique_ptr<sqfree::ListAssignment>
make_assignment(const std::string& spec) {
    if (spec.rfind("random:", 0) == 0) {
        const std::string args = spec.substr(7);
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw ParseError("expected random:<seed>,<sigma>");
        uint64_t seed = 0;
        uint32_t sigma = 0;
        try {
            seed = std::stoull(args.substr(0, comma));
            sigma = static_cast<uint32_t>(std::stoul(args.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError("malformed random:<seed>,<sigma> spec: " + spec);
        }
        return std::make_unique<sqfree::RandomAssignment>(seed, sigma);
    }
    return std::make_unique<sqfree::StaticAssignment>(
        wordio::read_list_file(spec));
}

int run_gen_squarefree(const SquarefreeGenOpts& o) {
    auto lists = make_assignment(o.lists);
    std::vector<sqfree::Symbol> word;
    if (o.reference || o.flags.paranoid || o.flags.transcript ||
        o.flags.prune_subsumed) {
        TranscriptSink sink;
        word = sqfree::generate_reference(*lists, o.length,
                                          sink.options(o.flags));
    } else {
        word = sqfree::generate(*lists, o.length);
    }
    emit(o.flags, wordio::render_word(word) + "\n");
    return 0;
}

struct BeckGenOpts {
    std::string c;
    std::string beta;
    std::string N = "auto";
    size_t length = 0;
    EngineFlags flags;
};

int parse_n_flag(const std::string& text, const std::function<int()>& fallback) {
    if (text == "auto")
        return fallback();
    try {
        size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size())
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ParseError("expected --N auto or an integer, got '" + text + "'");
    }
}

int run_gen_beck(const BeckGenOpts& o) {
    const Rat c = parse_rational(o.c);
    const Rat beta = parse_rational(o.beta);
    const int N = parse_n_flag(o.N, [&] { return beck::min_N(c, beta); });
    const beck::BeckParams params = beck::certify(c, beta, N);
    std::cerr << "certified: N = " << params.N
              << ", omega = " << rat_str(params.omega) << ", beta*(1+omega) = "
              << rat_str(params.beta * (1 + params.omega)) << " <= 2\n";
    TranscriptSink sink;
    auto bits = beck::generate(params, o.length, sink.options(o.flags));
    emit(o.flags, wordio::render_bits(bits) + "\n");
    return 0;
}

struct BlocksGenOpts {
    std::string epsilon;
    std::string beta;
    std::string N = "auto";
    size_t length = 0;
    bool reference = false;
    EngineFlags flags;
};

int run_gen_blocks(const BlocksGenOpts& o) {
    const Rat eps = parse_rational(o.epsilon);
    const Rat beta = parse_rational(o.beta);
    blocks::BlocksParams params =
        o.N == "auto" ? blocks::certify_min_N(eps, beta)
                      : blocks::certify(eps, beta,
                                        parse_n_flag(o.N, [] { return 0; }));
    std::cerr << "certified: N = " << params.N
              << ", c_upper = " << rat_str(params.c_upper)
              << ", M = " << params.M
              << ", omega ~= " << decimal(params.omega) << "\n";
    std::vector<uint8_t> bits;
    if (o.reference || o.flags.paranoid || o.flags.transcript ||
        o.flags.prune_subsumed) {
        TranscriptSink sink;
        bits = blocks::generate_reference(params, o.length,
                                          sink.options(o.flags));
    } else {
        bits = blocks::generate(params, o.length);
    }
    emit(o.flags, wordio::render_bits(bits) + "\n");
    return 0;
}

struct DiophGenOpts {
    std::string denoms;
    int k = 6;
    std::string beta = "auto";
    size_t bits = 0;
    int C = 0; // 0 = derive from the set
    EngineFlags flags;
};

dioph::DenominatorSet parse_denoms(const std::string& spec) {
    if (spec == "pow2")
        return dioph::DenominatorSet::pow2(62);
    if (spec == "fib")
        return dioph::DenominatorSet::fibonacci(1ull << 62);
    if (spec.rfind("file:", 0) == 0)
        return dioph::DenominatorSet::from_file(spec.substr(5));
    throw ParseError("unknown denominator spec '" + spec +
                     "' (expected pow2, fib, or file:<path>)");
}

int run_gen_dioph(const DiophGenOpts& o) {
    const dioph::DenominatorSet denoms = parse_denoms(o.denoms);
    const int C = o.C > 0 ? o.C : std::max(1, denoms.octave_bound());
    const Rat beta = o.beta == "auto" ? advisor::optimal_beta(
                                            static_cast<uint64_t>(C), o.k)
                                      : parse_rational(o.beta);
    const dioph::DiophParams params = dioph::make_params(o.k, beta, C);
    std::cerr << "params: k = " << params.k << ", C = " << params.C
              << ", beta = " << rat_str(params.beta)
              << " ~= " << decimal(params.beta)
              << ", epsilon = " << rat_str(params.epsilon)
              << ", omega = " << rat_str(params.omega) << "\n"
              << "condition beta + 3C*beta^-(k-1) <= 2: "
              << (params.star_certified ? "holds" : "FAILS") << "\n"
              << "condition beta*(1+omega) <= 2: "
              << (params.proof_certified ? "holds" : "fails (reported only)")
              << "\n";
    TranscriptSink sink;
    auto bits = dioph::generate_theta(denoms, params, o.bits,
                                      sink.options(o.flags));
    emit(o.flags, wordio::render_bits(bits) + "\n");
    return 0;
}

// --- verify ---------------------------------------------------------------

struct VerifyCommonOpts {
    std::string input = "-";
};

struct MillerVerifyOpts {
    std::string factors;
    VerifyCommonOpts common;
};

int run_verify_miller(const MillerVerifyOpts& o) {
    const auto wide = wordio::parse_word(slurp(o.common.input));
    std::vector<uint8_t> word;
    word.reserve(wide.size());
    for (uint32_t s : wide) {
        if (s > 255)
            throw ParseError("symbol " + std::to_string(s) +
                             " out of range for factor verification");
        word.push_back(static_cast<uint8_t>(s));
    }
    const auto report =
        miller::verify_factors(word, wordio::read_factor_file(o.factors));
    return report_and_exit_code(report.to_json());
}

struct SquarefreeVerifyOpts {
    std::string word; // literal characters, e.g. --word hotshots
    VerifyCommonOpts common;
};

int run_verify_squarefree(const SquarefreeVerifyOpts& o) {
    std::vector<sqfree::Symbol> word;
    if (!o.word.empty()) {
        word.reserve(o.word.size());
        for (unsigned char ch : o.word)
            word.push_back(static_cast<sqfree::Symbol>(ch));
    } else {
        word = wordio::parse_word(slurp(o.common.input));
    }
    return report_and_exit_code(sqfree::verify_squarefree(word).to_json());
}

struct BeckVerifyOpts {
    std::string c;
    std::string beta; // only needed for --N auto
    std::string N = "auto";
    VerifyCommonOpts common;
};

int run_verify_beck(const BeckVerifyOpts& o) {
    const Rat c = parse_rational(o.c);
    const int N = parse_n_flag(o.N, [&] {
        if (o.beta.empty())
            throw ParseError("--N auto needs --beta to recompute min_N");
        return beck::min_N(c, parse_rational(o.beta));
    });
    const auto bits = wordio::parse_bits(slurp(o.common.input));
    return report_and_exit_code(
        beck::verify_separation(bits, c, N).to_json());
}

struct BlocksVerifyOpts {
    std::string epsilon;
    std::string beta; // only needed for --N auto
    std::string N = "auto";
    VerifyCommonOpts common;
};

int run_verify_blocks(const BlocksVerifyOpts& o) {
    const Rat eps = parse_rational(o.epsilon);
    const int N = parse_n_flag(o.N, [&] {
        if (o.beta.empty())
            throw ParseError("--N auto needs --beta to recompute min_N");
        return blocks::certify_min_N(eps, parse_rational(o.beta)).N;
    });
    const auto bits = wordio::parse_bits(slurp(o.common.input));
    return report_and_exit_code(blocks::verify_blocks(bits, eps, N).to_json());
}

struct DiophVerifyOpts {
    std::string denoms;
    int k = 6;
    VerifyCommonOpts common;
};

int run_verify_dioph(const DiophVerifyOpts& o) {
    const auto bits = wordio::parse_bits(slurp(o.common.input));
    const auto report =
        dioph::verify_regularity(bits, parse_denoms(o.denoms), o.k);
    return report_and_exit_code(report.to_json());
}

// --- params ----------------------------------------------------------------

int run_params_mink(int C) {
    std::cout << advisor::min_k(static_cast<uint64_t>(C)) << "\n";
    return 0;
}

int run_params_beta(int C, int k) {
    const Rat b = advisor::optimal_beta(static_cast<uint64_t>(C), k);
    std::cout << rat_str(b) << " ~= " << decimal(b) << "\n";
    return 0;
}

int run_params_eps(int C) {
    const auto r = advisor::epsilon_of_C(static_cast<uint64_t>(C));
    std::cout << "eps = " << rat_str(r.eps) << " ~= " << decimal(r.eps) << "\n"
              << "reference = " << rat_str(r.reference)
              << " ~= " << decimal(r.reference) << "\n"
              << "meets_reference = " << (r.meets_reference ? "true" : "false")
              << "\n";
    return r.meets_reference ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree-escape game generators, verifiers, and parameter "
                 "advisor"};
    app.require_subcommand(1);
    std::function<int()> action;

    // gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a sequence");
    gen->require_subcommand(1);

    auto miller_gen = std::make_shared<MillerGenOpts>();
    {
        auto* cmd = gen->add_subcommand("miller", "avoid forbidden factors");
        cmd->add_option("--factors", miller_gen->factors,
                        "forbidden-factor file")
            ->required();
        cmd->add_option("--alphabet", miller_gen->alphabet, "alphabet size");
        cmd->add_option("--beta", miller_gen->beta, "game base p/q")
            ->required();
        cmd->add_option("--length", miller_gen->length, "symbols to emit")
            ->required();
        add_engine_flags(cmd, miller_gen->flags);
        cmd->callback([&action, miller_gen] {
            action = [miller_gen] { return run_gen_miller(*miller_gen); };
        });
    }

    auto sqf_gen = std::make_shared<SquarefreeGenOpts>();
    {
        auto* cmd = gen->add_subcommand(
            "squarefree", "square-free word under a 4-list assignment");
        cmd->add_option("--lists", sqf_gen->lists,
                        "list file or random:<seed>,<sigma>")
            ->required();
        cmd->add_option("--length", sqf_gen->length, "symbols to emit")
            ->required();
        cmd->add_flag("--reference", sqf_gen->reference,
                      "use the generic engine instead of the fast path");
        add_engine_flags(cmd, sqf_gen->flags);
        cmd->callback([&action, sqf_gen] {
            action = [sqf_gen] { return run_gen_squarefree(*sqf_gen); };
        });
    }

    auto beck_gen = std::make_shared<BeckGenOpts>();
    {
        auto* cmd = gen->add_subcommand(
            "beck", "bits whose equal factors sit far apart");
        cmd->add_option("--c", beck_gen->c, "separation base p/q")->required();
        cmd->add_option("--beta", beck_gen->beta, "game base p/q")->required();
        cmd->add_option("--N", beck_gen->N, "auto or an integer >= 1");
        cmd->add_option("--length", beck_gen->length, "bits to emit")
            ->required();
        add_engine_flags(cmd, beck_gen->flags);
        cmd->callback([&action, beck_gen] {
            action = [beck_gen] { return run_gen_beck(*beck_gen); };
        });
    }

    auto blocks_gen = std::make_shared<BlocksGenOpts>();
    {
        auto* cmd = gen->add_subcommand(
            "blocks", "bits whose adjacent blocks differ a lot");
        cmd->add_option("--epsilon", blocks_gen->epsilon, "epsilon p/q")
            ->required();
        cmd->add_option("--beta", blocks_gen->beta, "game base p/q")
            ->required();
        cmd->add_option("--N", blocks_gen->N, "auto or an integer >= 1");
        cmd->add_option("--length", blocks_gen->length, "bits to emit")
            ->required();
        cmd->add_flag("--reference", blocks_gen->reference,
                      "use the generic engine instead of the fast path");
        add_engine_flags(cmd, blocks_gen->flags);
        cmd->callback([&action, blocks_gen] {
            action = [blocks_gen] { return run_gen_blocks(*blocks_gen); };
        });
    }

    auto dioph_gen = std::make_shared<DiophGenOpts>();
    {
        auto* cmd = gen->add_subcommand(
            "dioph", "binary expansion badly approximable by a sparse set");
        cmd->add_option("--denoms", dioph_gen->denoms,
                        "pow2, fib, or file:<path>")
            ->required();
        cmd->add_option("--k", dioph_gen->k, "window exponent (epsilon=2^-k)")
            ->required();
        cmd->add_option("--beta", dioph_gen->beta, "game base p/q, or auto");
        cmd->add_option("--bits", dioph_gen->bits, "bits to emit")->required();
        cmd->add_option("--C", dioph_gen->C,
                        "octave bound override (default: from the set)");
        add_engine_flags(cmd, dioph_gen->flags);
        cmd->callback([&action, dioph_gen] {
            action = [dioph_gen] { return run_gen_dioph(*dioph_gen); };
        });
    }

    // verify --------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "verify a sequence");
    verify->require_subcommand(1);

    auto miller_ver = std::make_shared<MillerVerifyOpts>();
    {
        auto* cmd = verify->add_subcommand("miller", "scan for factors");
        cmd->add_option("--factors", miller_ver->factors,
                        "forbidden-factor file")
            ->required();
        cmd->add_option("--input", miller_ver->common.input,
                        "word file, or - for standard input");
        cmd->callback([&action, miller_ver] {
            action = [miller_ver] { return run_verify_miller(*miller_ver); };
        });
    }

    auto sqf_ver = std::make_shared<SquarefreeVerifyOpts>();
    {
        auto* cmd = verify->add_subcommand("squarefree", "scan for squares");
        cmd->add_option("--word", sqf_ver->word,
                        "literal word, one symbol per character");
        cmd->add_option("--input", sqf_ver->common.input,
                        "word file, or - for standard input");
        cmd->callback([&action, sqf_ver] {
            action = [sqf_ver] { return run_verify_squarefree(*sqf_ver); };
        });
    }

    auto beck_ver = std::make_shared<BeckVerifyOpts>();
    {
        auto* cmd = verify->add_subcommand("beck", "scan for close factors");
        cmd->add_option("--c", beck_ver->c, "separation base p/q")->required();
        cmd->add_option("--beta", beck_ver->beta,
                        "game base p/q (for --N auto)");
        cmd->add_option("--N", beck_ver->N, "auto or an integer >= 1");
        cmd->add_option("--input", beck_ver->common.input,
                        "bit file, or - for standard input");
        cmd->callback([&action, beck_ver] {
            action = [beck_ver] { return run_verify_beck(*beck_ver); };
        });
    }

    auto blocks_ver = std::make_shared<BlocksVerifyOpts>();
    {
        auto* cmd = verify->add_subcommand("blocks",
                                           "scan adjacent equal-length blocks");
        cmd->add_option("--epsilon", blocks_ver->epsilon, "epsilon p/q")
            ->required();
        cmd->add_option("--beta", blocks_ver->beta,
                        "game base p/q (for --N auto)");
        cmd->add_option("--N", blocks_ver->N, "auto or an integer >= 1");
        cmd->add_option("--input", blocks_ver->common.input,
                        "bit file, or - for standard input");
        cmd->callback([&action, blocks_ver] {
            action = [blocks_ver] { return run_verify_blocks(*blocks_ver); };
        });
    }

    auto dioph_ver = std::make_shared<DiophVerifyOpts>();
    {
        auto* cmd = verify->add_subcommand("dioph", "check 2^-k regularity");
        cmd->add_option("--denoms", dioph_ver->denoms,
                        "pow2, fib, or file:<path>")
            ->required();
        cmd->add_option("--k", dioph_ver->k, "window exponent")->required();
        cmd->add_option("--input", dioph_ver->common.input,
                        "bit file, or - for standard input");
        cmd->callback([&action, dioph_ver] {
            action = [dioph_ver] { return run_verify_dioph(*dioph_ver); };
        });
    }

    // params --------------------------------------------------------------
    auto* params = app.add_subcommand("params", "parameter advisor");
    params->require_subcommand(1);

    auto mink_C = std::make_shared<int>(1);
    {
        auto* cmd = params->add_subcommand("mink", "smallest certifying k");
        cmd->add_option("--C", *mink_C, "octave bound")->required();
        cmd->callback([&action, mink_C] {
            action = [mink_C] { return run_params_mink(*mink_C); };
        });
    }

    auto beta_opts = std::make_shared<std::pair<int, int>>(1, 6);
    {
        auto* cmd = params->add_subcommand("beta", "optimal beta for (C, k)");
        cmd->add_option("--C", beta_opts->first, "octave bound")->required();
        cmd->add_option("--k", beta_opts->second, "window exponent")
            ->required();
        cmd->callback([&action, beta_opts] {
            action = [beta_opts] {
                return run_params_beta(beta_opts->first, beta_opts->second);
            };
        });
    }

    auto eps_C = std::make_shared<int>(2);
    {
        auto* cmd = params->add_subcommand("eps", "epsilon(C) with reference");
        cmd->add_option("--C", *eps_C, "octave bound, >= 2")->required();
        cmd->callback([&action, eps_C] {
            action = [eps_C] { return run_params_eps(*eps_C); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        return action ? action() : 2;
    } catch (const NotCertified& e) {
        std::cerr << "not certified: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const GameError& e) {
        std::cerr << "internal invariant breach: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
