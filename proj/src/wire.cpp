#include "enkvote/wire.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>

namespace enkvote {

namespace {

bool known_type(std::uint8_t octet) {
    switch (static_cast<MsgType>(octet)) {
    case MsgType::submit:
    case MsgType::relay_ac:
    case MsgType::relay_ca:
    case MsgType::relay_av:
    case MsgType::relay_va:
    case MsgType::relay_ac_final:
    case MsgType::announce:
    case MsgType::board_export:
        return true;
    }
    return false;
}

// Line-oriented "key: value" file. Keys must be unique; consumers account for
// every line so stray keys fail loudly.
class KvText {
public:
    static KvText parse(std::string_view text) {
        KvText kv;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            auto sep = line.find(": ");
            if (sep == std::string::npos || sep == 0)
                throw FormatError("expected 'key: value', got: " + line);
            if (!kv.values_.emplace(line.substr(0, sep), line.substr(sep + 2)).second)
                throw FormatError("duplicate key: " + line.substr(0, sep));
        }
        return kv;
    }

    const std::string& need(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end())
            throw FormatError("missing key: " + key);
        ++consumed_;
        return it->second;
    }

    void done() const {
        if (consumed_ != values_.size())
            throw FormatError("unexpected keys in file");
    }

private:
    std::map<std::string, std::string> values_;
    std::size_t consumed_ = 0;
};

std::size_t parse_count(const std::string& text) {
    try {
        std::size_t pos = 0;
        unsigned long long value = std::stoull(text, &pos);
        if (pos != text.size())
            throw FormatError("trailing characters in number: " + text);
        return static_cast<std::size_t>(value);
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw FormatError("expected a number, got: " + text);
    }
}

std::string password_text(const Password& password) {
    return to_hex(password.octets()) + " " + std::to_string(password.bits());
}

Password parse_password(const std::string& text) {
    auto space = text.find(' ');
    if (space == std::string::npos)
        throw FormatError("password fields need '<hex> <bits>'");
    unsigned bits = static_cast<unsigned>(parse_count(text.substr(space + 1)));
    return Password::from_bytes(from_hex(text.substr(0, space)), bits);
}

SymmetricKey parse_key(const std::string& text, RoleTag tag) {
    return SymmetricKey::from_bytes(from_hex(text), tag);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Credentials are written through open(2) so the 0600 mode holds from the
// first byte.
void write_private_file(const std::filesystem::path& path, std::string_view content) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd < 0)
        throw FormatError("cannot write " + path.string());
    std::size_t off = 0;
    while (off < content.size()) {
        ssize_t n = ::write(fd, content.data() + off, content.size() - off);
        if (n <= 0) {
            ::close(fd);
            throw FormatError("short write to " + path.string());
        }
        off += static_cast<std::size_t>(n);
    }
    ::close(fd);
}

void write_public_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("cannot write " + path.string());
    out << content;
}

void check_format_line(KvText& kv, const std::string& expected) {
    if (kv.need("format") != expected)
        throw FormatError("wrong file format, expected " + expected);
}

} // namespace

std::string_view msg_type_name(MsgType type) {
    switch (type) {
    case MsgType::submit: return "submit";
    case MsgType::relay_ac: return "relay_ac";
    case MsgType::relay_ca: return "relay_ca";
    case MsgType::relay_av: return "relay_av";
    case MsgType::relay_va: return "relay_va";
    case MsgType::relay_ac_final: return "relay_ac_final";
    case MsgType::announce: return "announce";
    case MsgType::board_export: return "board_export";
    }
    return "unknown";
}

MsgType hop_msg_type(HopKind hop) {
    switch (hop) {
    case HopKind::open_ac: return MsgType::relay_ac;
    case HopKind::back_ca: return MsgType::relay_ca;
    case HopKind::deliver_av: return MsgType::relay_av;
    case HopKind::return_va: return MsgType::relay_va;
    case HopKind::final_ac: return MsgType::relay_ac_final;
    }
    throw DomainError("unknown hop");
}

Bytes Envelope::frame() const {
    Bytes out;
    out.reserve(5 + body.size());
    out.push_back(static_cast<std::uint8_t>(type));
    append_u32_be(out, static_cast<std::uint32_t>(body.size()));
    append(out, body);
    return out;
}

Envelope Envelope::parse(ByteView frame) {
    auto parsed = parse_prefix(frame);
    if (!parsed)
        throw ProtocolError("truncated envelope");
    if (parsed->second != frame.size())
        throw ProtocolError("trailing octets after the envelope");
    return std::move(parsed->first);
}

std::optional<std::pair<Envelope, std::size_t>> Envelope::parse_prefix(ByteView buffer) {
    if (buffer.size() < 5)
        return std::nullopt;
    if (!known_type(buffer[0]))
        throw ProtocolError("unknown message type");
    std::uint32_t len = read_u32_be(buffer, 1);
    if (buffer.size() < 5 + static_cast<std::size_t>(len))
        return std::nullopt;
    Envelope env;
    env.type = static_cast<MsgType>(buffer[0]);
    env.body.assign(buffer.begin() + 5, buffer.begin() + 5 + len);
    return std::make_pair(std::move(env), 5 + static_cast<std::size_t>(len));
}

Envelope announce_envelope(std::string_view text) {
    Envelope env;
    env.type = MsgType::announce;
    env.body = bytes_of_string(text);
    return env;
}

std::string announce_text(const Envelope& envelope) {
    if (envelope.type != MsgType::announce)
        throw ProtocolError("not an announcement");
    return std::string(envelope.body.begin(), envelope.body.end());
}

std::string_view run_mode_name(RunMode mode) {
    return mode == RunMode::simulated ? "simulated" : "socket";
}

ElectionConfig Manifest::config() const {
    ElectionConfig cfg;
    cfg.group = group;
    cfg.candidates = candidates;
    cfg.voter_count = voter_count;
    cfg.password_bits = password_bits;
    return cfg;
}

std::string Manifest::to_text() const {
    std::ostringstream out;
    out << "format: enkvote-manifest-1\n";
    out << "mode: " << run_mode_name(mode) << "\n";
    out << "group: " << group.to_text() << "\n";
    out << "voters: " << voter_count << "\n";
    out << "password_bits: " << password_bits << "\n";
    out << "code_bits: " << candidates.code_bits << "\n";
    out << "candidates: " << candidates.size() << "\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out << "candidate." << i + 1 << ".label: " << candidates.labels[i] << "\n";
        out << "candidate." << i + 1 << ".code: " << to_hex(candidates.codes[i]) << "\n";
    }
    return out.str();
}

Manifest Manifest::parse(std::string_view text) {
    try {
        KvText kv = KvText::parse(text);
        check_format_line(kv, "enkvote-manifest-1");
        Manifest manifest;
        const std::string& mode = kv.need("mode");
        if (mode == "simulated")
            manifest.mode = RunMode::simulated;
        else if (mode == "socket")
            manifest.mode = RunMode::socket;
        else
            throw FormatError("unknown mode: " + mode);
        manifest.group = GroupParams::from_text(kv.need("group"));
        manifest.voter_count = parse_count(kv.need("voters"));
        manifest.password_bits = static_cast<unsigned>(parse_count(kv.need("password_bits")));
        manifest.candidates.code_bits = static_cast<unsigned>(parse_count(kv.need("code_bits")));
        std::size_t count = parse_count(kv.need("candidates"));
        for (std::size_t i = 1; i <= count; ++i) {
            std::string prefix = "candidate." + std::to_string(i) + ".";
            manifest.candidates.labels.push_back(kv.need(prefix + "label"));
            manifest.candidates.codes.push_back(from_hex(kv.need(prefix + "code")));
        }
        kv.done();
        manifest.config().validate();
        return manifest;
    } catch (const ManifestError&) {
        throw;
    } catch (const Error& e) {
        throw ManifestError(std::string("bad manifest: ") + e.what());
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ManifestError(e.what());
    }
    return Manifest::parse(text);
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    write_public_file(path, manifest.to_text());
}

void write_voter_credential(const std::filesystem::path& path, const VoterCredential& cred) {
    std::ostringstream out;
    out << "format: enkvote-voter-1\n";
    out << "index: " << cred.index << "\n";
    out << "id: " << to_hex(cred.id) << "\n";
    out << "p_av: " << password_text(cred.p_av) << "\n";
    out << "p_vc: " << password_text(cred.p_vc) << "\n";
    out << "k_va: " << to_hex(cred.k_va.key) << "\n";
    out << "k_vc: " << to_hex(cred.k_vc.key) << "\n";
    write_private_file(path, out.str());
}

VoterCredential read_voter_credential(const std::filesystem::path& path) {
    KvText kv = KvText::parse(read_text_file(path));
    check_format_line(kv, "enkvote-voter-1");
    VoterCredential cred;
    cred.index = parse_count(kv.need("index"));
    cred.id = from_hex(kv.need("id"));
    cred.p_av = parse_password(kv.need("p_av"));
    cred.p_vc = parse_password(kv.need("p_vc"));
    cred.k_va = parse_key(kv.need("k_va"), RoleTag::va);
    cred.k_vc = parse_key(kv.need("k_vc"), RoleTag::vc);
    kv.done();
    if (cred.id.size() != kIdBytes)
        throw FormatError("voter id must be 16 octets");
    if (cred.index < 1)
        throw FormatError("voter index is 1-based");
    return cred;
}

void write_admin_credential(const std::filesystem::path& path, const AdminCredential& cred) {
    std::ostringstream out;
    out << "format: enkvote-admin-1\n";
    out << "k_va: " << to_hex(cred.k_va.key) << "\n";
    out << "k_ac: " << to_hex(cred.k_ac.key) << "\n";
    out << "p_ac: " << password_text(cred.p_ac) << "\n";
    out << "voters: " << cred.roster.size() << "\n";
    for (std::size_t i = 0; i < cred.roster.size(); ++i) {
        out << "roster." << i + 1 << ".id: " << to_hex(cred.roster[i].id) << "\n";
        out << "roster." << i + 1 << ".p_av: " << password_text(cred.roster[i].p_av) << "\n";
    }
    write_private_file(path, out.str());
}

AdminCredential read_admin_credential(const std::filesystem::path& path) {
    KvText kv = KvText::parse(read_text_file(path));
    check_format_line(kv, "enkvote-admin-1");
    AdminCredential cred;
    cred.k_va = parse_key(kv.need("k_va"), RoleTag::va);
    cred.k_ac = parse_key(kv.need("k_ac"), RoleTag::ac);
    cred.p_ac = parse_password(kv.need("p_ac"));
    std::size_t count = parse_count(kv.need("voters"));
    for (std::size_t i = 1; i <= count; ++i) {
        std::string prefix = "roster." + std::to_string(i) + ".";
        RosterEntry entry;
        entry.id = from_hex(kv.need(prefix + "id"));
        if (entry.id.size() != kIdBytes)
            throw FormatError("roster id must be 16 octets");
        entry.p_av = parse_password(kv.need(prefix + "p_av"));
        cred.roster.push_back(std::move(entry));
    }
    kv.done();
    return cred;
}

void write_counter_credential(const std::filesystem::path& path, const CounterCredential& cred) {
    std::ostringstream out;
    out << "format: enkvote-counter-1\n";
    out << "k_ac: " << to_hex(cred.k_ac.key) << "\n";
    out << "k_vc: " << to_hex(cred.k_vc.key) << "\n";
    out << "p_ac: " << password_text(cred.p_ac) << "\n";
    out << "p_vc: " << password_text(cred.p_vc) << "\n";
    write_private_file(path, out.str());
}

CounterCredential read_counter_credential(const std::filesystem::path& path) {
    KvText kv = KvText::parse(read_text_file(path));
    check_format_line(kv, "enkvote-counter-1");
    CounterCredential cred;
    cred.k_ac = parse_key(kv.need("k_ac"), RoleTag::ac);
    cred.k_vc = parse_key(kv.need("k_vc"), RoleTag::vc);
    cred.p_ac = parse_password(kv.need("p_ac"));
    cred.p_vc = parse_password(kv.need("p_vc"));
    kv.done();
    return cred;
}

std::string Receipt::to_text() const {
    std::ostringstream out;
    out << "format: enkvote-receipt-1\n";
    out << "voter: " << voter_index << "\n";
    out << "ballot: " << to_hex(package.ballot) << "\n";
    out << "verif: " << to_hex(package.verif) << "\n";
    out << "tag_va: " << to_hex(package.tag_va.wire()) << "\n";
    out << "tag_vc: " << to_hex(package.tag_vc.wire()) << "\n";
    return out.str();
}

Receipt Receipt::parse(std::string_view text) {
    KvText kv = KvText::parse(text);
    check_format_line(kv, "enkvote-receipt-1");
    Receipt receipt;
    receipt.voter_index = parse_count(kv.need("voter"));
    receipt.package.ballot = from_hex(kv.need("ballot"));
    receipt.package.verif = from_hex(kv.need("verif"));
    receipt.package.tag_va = MacTag::from_wire(from_hex(kv.need("tag_va")));
    receipt.package.tag_vc = MacTag::from_wire(from_hex(kv.need("tag_vc")));
    kv.done();
    if (receipt.package.verif.size() != kVerifBytes)
        throw FormatError("verification token must be 16 octets");
    return receipt;
}

void write_receipt(const std::filesystem::path& path, const Receipt& receipt) {
    write_private_file(path, receipt.to_text());
}

Receipt read_receipt(const std::filesystem::path& path) {
    return Receipt::parse(read_text_file(path));
}

} // namespace enkvote
