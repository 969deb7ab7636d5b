// Command-line front end: setup, simulated runs, the three socket roles,
// board audit and receipt verification, attack scenarios, and the password
// cost calculator.

#include <enkvote/runner.hpp>
#include <enkvote/security.hpp>
#include <enkvote/sockets.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace enkvote;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const char* kUsage = R"(usage: enkvote <command> [flags]

commands:
  setup         emit a manifest and one credential file per party
                --out DIR --voters N --seed S [--candidates A,B,...]
                [--bits 768|1024|2048] [--password-bits N] [--code-bits N]
  run           run a simulated election and print the board export
                --manifest FILE --seed S --choices 1,2,... [--out DIR]
  serve-counter run the counter over TCP until publication
                --manifest FILE --credential FILE --seed S [--listen HOST:PORT]
  serve-admin   run the administrator over TCP until publication
                --manifest FILE --credential FILE --seed S --connect HOST:PORT
                [--listen HOST:PORT]
  vote          submit one ballot over TCP and verify the published board
                --manifest FILE --credential FILE --seed S --connect HOST:PORT
                --choice N [--receipt-out FILE]
  audit         check every board row's administrator tag
                --manifest FILE --credential ADMIN_FILE --board FILE
  verify        check a kept receipt against a board export
                --receipt FILE --board FILE
  attack        run one attack scenario, or all of them
                --scenario NAME|all [--seed S] [--stride N]
  costmodel     print a password cost table; exits nonzero on any mismatch
                --profile generic|ion-trap|all

Flags take a value; seeds are decimal. Socket parties must share the seed.
)";

struct Args {
    std::map<std::string, std::string> values;

    static Args parse(int argc, char** argv, int first) {
        Args args;
        for (int i = first; i < argc; ++i) {
            std::string flag = argv[i];
            if (flag.rfind("--", 0) != 0)
                throw UsageError("unexpected argument: " + flag);
            if (i + 1 >= argc)
                throw UsageError("flag needs a value: " + flag);
            args.values[flag.substr(2)] = argv[++i];
        }
        return args;
    }

    const std::string& require(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end())
            throw UsageError("missing required flag: --" + name);
        return it->second;
    }

    std::string get(const std::string& name, const std::string& fallback) const {
        auto it = values.find(name);
        return it == values.end() ? fallback : it->second;
    }

    bool has(const std::string& name) const { return values.count(name) != 0; }
};

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw UsageError(what + " is not a decimal number: " + text);
    return value;
}

SocketEndpoint parse_endpoint(const std::string& text) {
    const std::size_t colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw UsageError("endpoint must be HOST:PORT: " + text);
    SocketEndpoint endpoint;
    endpoint.host = text.substr(0, colon);
    endpoint.port = static_cast<std::uint16_t>(parse_u64(text.substr(colon + 1), "port"));
    return endpoint;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream stream(text);
    while (std::getline(stream, item, ','))
        out.push_back(item);
    return out;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("cannot write " + path.string());
    out << text;
}

const GroupParams& standard_group(std::uint64_t bits) {
    if (bits != 768 && bits != 1024 && bits != 2048)
        throw UsageError("--bits must be 768, 1024 or 2048");
    return GroupParams::standard(static_cast<unsigned>(bits));
}

int cmd_setup(const Args& args) {
    const fs::path dir = args.get("out", ".");
    const std::uint64_t seed = parse_u64(args.require("seed"), "--seed");
    const std::size_t voters = parse_u64(args.require("voters"), "--voters");
    const std::vector<std::string> labels = split_list(args.get("candidates", "Alpha,Beta"));
    const GroupParams& group = standard_group(parse_u64(args.get("bits", "768"), "--bits"));
    const unsigned password_bits =
        static_cast<unsigned>(parse_u64(args.get("password-bits", "88"), "--password-bits"));
    const unsigned code_bits =
        static_cast<unsigned>(parse_u64(args.get("code-bits", "64"), "--code-bits"));

    EntropySource root = EntropySource::seeded(seed, "election");
    EntropySource code_rng = root.fork("candidates");
    Manifest manifest;
    manifest.mode = RunMode::simulated;
    manifest.group = group;
    manifest.candidates = CandidateSet::generate(labels, code_bits, code_rng);
    manifest.voter_count = voters;
    manifest.password_bits = password_bits;
    const ElectionSetup setup = setup_with_candidates(manifest.candidates, voters, group,
                                                      password_bits, root);

    fs::create_directories(dir);
    write_manifest(dir / "manifest.txt", manifest);
    write_admin_credential(dir / "admin.cred", setup.admin);
    write_counter_credential(dir / "counter.cred", setup.counter);
    for (std::size_t i = 0; i < setup.voters.size(); ++i)
        write_voter_credential(dir / ("voter." + std::to_string(i + 1) + ".cred"),
                               setup.voters[i]);
    std::cerr << "wrote manifest and " << (setup.voters.size() + 2) << " credential files to "
              << dir.string() << "\n";
    std::cout << setup.announcement;
    return 0;
}

int cmd_run(const Args& args) {
    Manifest manifest = read_manifest(args.require("manifest"));
    manifest.mode = RunMode::simulated;
    const std::uint64_t seed = parse_u64(args.require("seed"), "--seed");
    std::vector<std::size_t> choices;
    for (const std::string& item : split_list(args.require("choices")))
        choices.push_back(parse_u64(item, "choice"));

    const RunResult run = run_election(manifest, seed, choices);
    if (args.has("out")) {
        const fs::path dir = args.get("out", ".");
        fs::create_directories(dir);
        write_text_file(dir / "board.txt", run.export_text);
        write_text_file(dir / "log.txt", run.log_text);
        for (const Receipt& receipt : run.receipts)
            write_receipt(dir / ("receipt." + std::to_string(receipt.voter_index) + ".txt"),
                          receipt);
        std::cerr << "wrote board, log and " << run.receipts.size() << " receipts to "
                  << dir.string() << "\n";
    }
    for (const VoterOutcome& voter : run.voters)
        std::cerr << "voter " << voter.index << ": "
                  << (voter.submitted ? verify_outcome_name(voter.verify) : "did not submit")
                  << "\n";
    std::cout << run.export_text;
    return 0;
}

int cmd_serve_counter(const Args& args) {
    CounterServeOptions options;
    options.manifest = read_manifest(args.require("manifest"));
    options.credential = read_counter_credential(args.require("credential"));
    options.seed = parse_u64(args.require("seed"), "--seed");
    options.listen = parse_endpoint(args.get("listen", "127.0.0.1:0"));
    options.on_listening = [](std::uint16_t port) {
        std::cerr << "counter listening on " << port << "\n";
    };
    std::cout << serve_counter(options);
    return 0;
}

int cmd_serve_admin(const Args& args) {
    AdminServeOptions options;
    options.manifest = read_manifest(args.require("manifest"));
    options.credential = read_admin_credential(args.require("credential"));
    options.seed = parse_u64(args.require("seed"), "--seed");
    options.listen = parse_endpoint(args.get("listen", "127.0.0.1:0"));
    options.counter = parse_endpoint(args.require("connect"));
    options.on_listening = [](std::uint16_t port) {
        std::cerr << "administrator listening on " << port << "\n";
    };
    options.on_authenticated = [](std::size_t count) {
        std::cerr << "authenticated " << count << "\n";
    };
    std::cout << serve_admin(options);
    return 0;
}

int cmd_vote(const Args& args) {
    VoterRunOptions options;
    options.manifest = read_manifest(args.require("manifest"));
    options.credential = read_voter_credential(args.require("credential"));
    options.seed = parse_u64(args.require("seed"), "--seed");
    options.admin = parse_endpoint(args.require("connect"));
    options.choice = parse_u64(args.require("choice"), "--choice");

    const VoterRunResult result = run_voter(options);
    std::cerr << "authentication: " << auth_outcome_name(result.auth) << "\n";
    if (args.has("receipt-out"))
        write_receipt(args.get("receipt-out", ""), result.receipt);
    std::cout << "verify: " << verify_outcome_name(result.verify) << "\n";
    return result.verify == VerifyOutcome::counted ? 0 : 1;
}

int cmd_audit(const Args& args) {
    const Manifest manifest = read_manifest(args.require("manifest"));
    const AdminCredential credential = read_admin_credential(args.require("credential"));
    const BoardExport board = parse_board_export(read_text_file(args.require("board")));

    Administrator admin(manifest.config(), credential, EntropySource::seeded(0, "audit"));
    const std::vector<std::size_t> offending = admin.audit(board);
    if (offending.empty()) {
        std::cout << "audit clean: " << board.rows.size() << " rows\n";
        return 0;
    }
    for (std::size_t entry : offending)
        std::cout << "entry " << entry << ": administrator tag mismatch\n";
    return 1;
}

int cmd_verify(const Args& args) {
    const Receipt receipt = read_receipt(args.require("receipt"));
    const BoardExport board = parse_board_export(read_text_file(args.require("board")));
    const VerifyOutcome outcome = verify_package(receipt.package, board);
    std::cout << verify_outcome_name(outcome) << "\n";
    return outcome == VerifyOutcome::counted ? 0 : 1;
}

AttackScenario scenario_from_cli(const std::string& name) {
    // a few spoken-order aliases for the tamper scenarios
    if (name == "tamper-admin")
        return AttackScenario::admin_substitution;
    if (name == "tamper-counter")
        return AttackScenario::counter_tamper;
    if (name == "tamper-hop")
        return AttackScenario::hop_tamper;
    return attack_scenario_from_name(name);
}

int cmd_attack(const Args& args) {
    const std::string name = args.require("scenario");
    const std::uint64_t seed = parse_u64(args.get("seed", "1"), "--seed");
    const std::size_t stride = parse_u64(args.get("stride", "1"), "--stride");

    AttackSuiteReport report;
    if (name == "all")
        report = attack_suite(seed, stride);
    else
        report.outcomes.push_back(run_attack(scenario_from_cli(name), seed, stride));
    std::cout << report.table();
    return report.all_detected() ? 0 : 1;
}

int cmd_costmodel(const Args& args) {
    const std::string profile = args.get("profile", "all");
    std::vector<CostModelReport> reports;
    if (profile == "generic" || profile == "all")
        reports.push_back(generic_gate_bound());
    if (profile == "ion-trap" || profile == "all")
        reports.push_back(ion_trap_bound());
    if (reports.empty())
        throw UsageError("--profile must be generic, ion-trap or all");

    bool all_match = true;
    for (const CostModelReport& report : reports) {
        std::cout << report.table() << "\n";
        all_match = all_match && report.all_match();
    }
    return all_match ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return 2;
    }
    const std::string command = argv[1];
    try {
        const Args args = Args::parse(argc, argv, 2);
        if (command == "setup")
            return cmd_setup(args);
        if (command == "run")
            return cmd_run(args);
        if (command == "serve-counter")
            return cmd_serve_counter(args);
        if (command == "serve-admin")
            return cmd_serve_admin(args);
        if (command == "vote")
            return cmd_vote(args);
        if (command == "audit")
            return cmd_audit(args);
        if (command == "verify")
            return cmd_verify(args);
        if (command == "attack")
            return cmd_attack(args);
        if (command == "costmodel")
            return cmd_costmodel(args);
        if (command == "help" || command == "--help" || command == "-h") {
            std::cout << kUsage;
            return 0;
        }
        throw UsageError("unknown command: " + command);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << kUsage;
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
