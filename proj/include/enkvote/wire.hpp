#pragma once

#include <enkvote/election.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace enkvote {

/// Message types on the wire. One octet; the gaps leave room without
/// renumbering.
enum class MsgType : std::uint8_t {
    submit = 0x01,
    relay_ac = 0x02,
    relay_ca = 0x03,
    relay_av = 0x04,
    relay_va = 0x05,
    relay_ac_final = 0x06,
    announce = 0x10,
    board_export = 0x11,
};

std::string_view msg_type_name(MsgType type);
MsgType hop_msg_type(HopKind hop);

/// Framed message: type octet, 4-octet big-endian body length, body.
struct Envelope {
    MsgType type = MsgType::announce;
    Bytes body;

    Bytes frame() const;
    static Envelope parse(ByteView frame); // ProtocolError unless exactly one envelope

    /// Incremental parse for stream transports: nullopt means the buffer does
    /// not hold a whole envelope yet; otherwise the envelope and the number of
    /// octets it consumed.
    static std::optional<std::pair<Envelope, std::size_t>> parse_prefix(ByteView buffer);
};

Envelope announce_envelope(std::string_view text);
std::string announce_text(const Envelope& envelope); // ProtocolError on wrong type

enum class RunMode : std::uint8_t { simulated, socket };
std::string_view run_mode_name(RunMode mode);

/// Everything public about an election, fixed before the first ballot:
/// group, candidate list with codes, electorate size, password width.
struct Manifest {
    RunMode mode = RunMode::simulated;
    GroupParams group;
    CandidateSet candidates;
    std::size_t voter_count = 0;
    unsigned password_bits = kDefaultPasswordBits;

    ElectionConfig config() const;
    std::string to_text() const;
    static Manifest parse(std::string_view text); // ManifestError
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Credential files: line-oriented "key: value", mode 0600. Passwords and
/// keys live here and nowhere else on disk.
void write_voter_credential(const std::filesystem::path& path, const VoterCredential& cred);
VoterCredential read_voter_credential(const std::filesystem::path& path);

void write_admin_credential(const std::filesystem::path& path, const AdminCredential& cred);
AdminCredential read_admin_credential(const std::filesystem::path& path);

void write_counter_credential(const std::filesystem::path& path, const CounterCredential& cred);
CounterCredential read_counter_credential(const std::filesystem::path& path);

/// What a voter keeps after submitting: enough to find and check their row
/// on the published board, nothing that identifies them.
struct Receipt {
    std::size_t voter_index = 0;
    BallotPackage package;

    std::string to_text() const;
    static Receipt parse(std::string_view text); // FormatError
};

void write_receipt(const std::filesystem::path& path, const Receipt& receipt);
Receipt read_receipt(const std::filesystem::path& path);

} // namespace enkvote
