#include "enkvote/sockets.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <thread>

namespace enkvote {

namespace {

using Clock = std::chrono::steady_clock;

void set_timeout(int fd, int timeout_ms) {
    timeval tv{};
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

sockaddr_in make_addr(const SocketEndpoint& endpoint) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint.port);
    if (inet_pton(AF_INET, endpoint.host.c_str(), &addr.sin_addr) != 1)
        throw ConfigError("not an IPv4 address: " + endpoint.host);
    return addr;
}

/// One framed-envelope connection. Owns the descriptor.
class Conn {
public:
    explicit Conn(int fd = -1) : fd_(fd) {}
    Conn(Conn&& other) noexcept : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
        other.fd_ = -1;
    }
    Conn& operator=(Conn&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            buffer_ = std::move(other.buffer_);
            other.fd_ = -1;
        }
        return *this;
    }
    Conn(const Conn&) = delete;
    Conn& operator=(const Conn&) = delete;
    ~Conn() { close(); }

    bool valid() const { return fd_ >= 0; }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    void send_envelope(const Envelope& envelope) {
        Bytes frame = envelope.frame();
        std::size_t off = 0;
        while (off < frame.size()) {
            ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
            if (n <= 0)
                throw ProtocolError("send failed");
            off += static_cast<std::size_t>(n);
        }
    }

    Envelope recv_envelope() {
        for (;;) {
            if (auto parsed = Envelope::parse_prefix(buffer_)) {
                buffer_.erase(buffer_.begin(), buffer_.begin() + parsed->second);
                return std::move(parsed->first);
            }
            std::uint8_t chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n == 0)
                throw ProtocolError("connection closed mid-envelope");
            if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK)
                    throw TimeoutError("socket read timed out");
                throw ProtocolError("recv failed");
            }
            buffer_.insert(buffer_.end(), chunk, chunk + n);
        }
    }

private:
    int fd_;
    Bytes buffer_;
};

class Listener {
public:
    Listener(const SocketEndpoint& endpoint, int timeout_ms) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0)
            throw ConfigError("cannot create socket");
        int one = 1;
        setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr = make_addr(endpoint);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
            ::listen(fd_, 64) != 0) {
            ::close(fd_);
            throw ConfigError("cannot listen on " + endpoint.host + ":" +
                              std::to_string(endpoint.port));
        }
        set_timeout(fd_, timeout_ms);
        timeout_ms_ = timeout_ms;
    }
    ~Listener() {
        if (fd_ >= 0)
            ::close(fd_);
    }
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    std::uint16_t port() const {
        sockaddr_in addr{};
        socklen_t len = sizeof addr;
        if (getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
            throw ConfigError("getsockname failed");
        return ntohs(addr.sin_port);
    }

    Conn accept() {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw TimeoutError("no connection arrived in time");
            throw ProtocolError("accept failed");
        }
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        set_timeout(fd, timeout_ms_);
        return Conn(fd);
    }

private:
    int fd_ = -1;
    int timeout_ms_ = 0;
};

/// Connect with retry until the peer starts listening or the deadline runs
/// out, so party start order does not matter.
Conn connect_to(const SocketEndpoint& endpoint, int timeout_ms) {
    sockaddr_in addr = make_addr(endpoint);
    auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0)
            throw ConfigError("cannot create socket");
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            set_timeout(fd, timeout_ms);
            return Conn(fd);
        }
        ::close(fd);
        if (Clock::now() >= deadline)
            throw TimeoutError("cannot reach " + endpoint.host + ":" +
                               std::to_string(endpoint.port));
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

Envelope relay_envelope(MsgType type, const RelayMessage& message) {
    return Envelope{type, message.wire()};
}

RelayMessage expect_relay(const Envelope& envelope, MsgType type) {
    if (envelope.type != type)
        throw ProtocolError(std::string("expected ") + std::string(msg_type_name(type)) +
                            ", got " + std::string(msg_type_name(envelope.type)));
    return RelayMessage::from_wire(envelope.body);
}

EntropySource role_rng(std::uint64_t seed, const std::string& label) {
    EntropySource root = EntropySource::seeded(seed, "election");
    return root.fork(label);
}

} // namespace

std::string serve_counter(const CounterServeOptions& options) {
    ElectionConfig config = options.manifest.config();
    config.validate();
    Counter counter(config, options.credential, role_rng(options.seed, "counter"));

    Listener listener(options.listen, options.timeout_ms);
    if (options.on_listening)
        options.on_listening(listener.port());
    Conn admin = listener.accept();

    for (;;) {
        Envelope env = admin.recv_envelope();
        switch (env.type) {
        case MsgType::announce: {
            std::string text = announce_text(env);
            if (text.rfind("authenticated ", 0) == 0) {
                counter.expect_rounds(std::stoull(text.substr(14)));
            } else if (text.rfind("round_failed ", 0) == 0) {
                counter.mark_round_failed(from_hex(text.substr(13)));
            } else if (text == "publish") {
                Counter::PublishResult pub = counter.publish();
                admin.send_envelope(
                    Envelope{MsgType::board_export, bytes_of_string(pub.export_text)});
                return pub.export_text;
            } else {
                throw ProtocolError("unknown announcement: " + text);
            }
            break;
        }
        case MsgType::relay_ac:
            try {
                RelayMessage back = counter.respond(RelayMessage::from_wire(env.body));
                admin.send_envelope(relay_envelope(MsgType::relay_ca, back));
            } catch (const Error& e) {
                admin.send_envelope(announce_envelope(std::string("refused ") + e.what()));
            }
            break;
        case MsgType::relay_ac_final:
            try {
                RoundOutcome outcome = counter.finish_round(RelayMessage::from_wire(env.body));
                admin.send_envelope(announce_envelope(
                    std::string("outcome ") + std::string(round_outcome_name(outcome))));
            } catch (const Error& e) {
                admin.send_envelope(announce_envelope(std::string("refused ") + e.what()));
            }
            break;
        default:
            throw ProtocolError(std::string("counter cannot handle ") +
                                std::string(msg_type_name(env.type)));
        }
    }
}

std::string serve_admin(const AdminServeOptions& options) {
    ElectionConfig config = options.manifest.config();
    config.validate();
    Administrator admin(config, options.credential, role_rng(options.seed, "admin"));

    Conn counter = connect_to(options.counter, options.timeout_ms);
    Listener listener(options.listen, options.timeout_ms);
    if (options.on_listening)
        options.on_listening(listener.port());

    // authentication window: voters arrive one by one
    std::map<std::size_t, Conn> voters; // by voter index
    while (voters.size() < config.voter_count) {
        Conn conn = listener.accept();
        Envelope env = conn.recv_envelope();
        if (env.type != MsgType::submit) {
            conn.send_envelope(announce_envelope("refused expected a submission"));
            continue;
        }
        AuthResult result;
        try {
            result = admin.authenticate(RelayMessage::from_wire(env.body));
        } catch (const FormatError&) {
            result.outcome = AuthOutcome::rejected_tampered;
        }
        conn.send_envelope(announce_envelope(
            std::string("auth ") + std::string(auth_outcome_name(result.outcome)) + " " +
            std::to_string(result.entry)));
        if (result.outcome != AuthOutcome::accepted)
            continue;
        // map the connection to its roster position for the delivery phase
        const Bytes& id = admin.auth_table().back().id;
        for (std::size_t i = 0; i < options.credential.roster.size(); ++i) {
            if (options.credential.roster[i].id == id) {
                voters.emplace(i + 1, std::move(conn));
                break;
            }
        }
        if (options.on_authenticated)
            options.on_authenticated(voters.size());
    }

    std::vector<Bytes> batch = admin.close_authentication();
    counter.send_envelope(announce_envelope("authenticated " + std::to_string(batch.size())));
    admin.substitute();

    for (std::size_t j = 1; j <= admin.round_count(); ++j) {
        Conn& voter = voters.at(admin.voter_index_for_round(j));
        try {
            RelayMessage open = admin.round_open(j);
            counter.send_envelope(relay_envelope(MsgType::relay_ac, open));
            RelayMessage back = expect_relay(counter.recv_envelope(), MsgType::relay_ca);

            RelayMessage deliver = admin.round_to_voter(j, back);
            voter.send_envelope(relay_envelope(MsgType::relay_av, deliver));
            RelayMessage ret = expect_relay(voter.recv_envelope(), MsgType::relay_va);

            RelayMessage fin = admin.round_to_counter(j, ret);
            counter.send_envelope(relay_envelope(MsgType::relay_ac_final, fin));
            Envelope verdict = counter.recv_envelope();
            if (verdict.type != MsgType::announce)
                throw ProtocolError("expected the round verdict");
        } catch (const TimeoutError&) {
            throw; // a dead peer ends the run; there is no one to keep waiting for
        } catch (const Error&) {
            counter.send_envelope(announce_envelope(
                "round_failed " + to_hex(admin.replaced_id_for_round(j))));
        }
    }

    counter.send_envelope(announce_envelope("publish"));
    Envelope exported = counter.recv_envelope();
    if (exported.type != MsgType::board_export)
        throw ProtocolError("expected the board export");
    for (auto& [index, conn] : voters)
        conn.send_envelope(exported);
    return std::string(exported.body.begin(), exported.body.end());
}

VoterRunResult run_voter(const VoterRunOptions& options) {
    ElectionConfig config = options.manifest.config();
    config.validate();
    Voter voter(config, options.credential,
                role_rng(options.seed, "voter." + std::to_string(options.credential.index)));

    Conn admin = connect_to(options.admin, options.timeout_ms);
    RelayMessage submission = voter.submit(options.choice);
    admin.send_envelope(Envelope{MsgType::submit, submission.wire()});

    VoterRunResult result;
    std::string ack = announce_text(admin.recv_envelope());
    if (ack.rfind("auth ", 0) != 0)
        throw ProtocolError("expected the authentication verdict, got: " + ack);
    std::string verdict = ack.substr(5, ack.rfind(' ') - 5);
    if (verdict == "accepted")
        result.auth = AuthOutcome::accepted;
    else if (verdict == "rejected_duplicate")
        result.auth = AuthOutcome::rejected_duplicate;
    else if (verdict == "rejected_ineligible")
        result.auth = AuthOutcome::rejected_ineligible;
    else
        result.auth = AuthOutcome::rejected_tampered;
    result.receipt = Receipt{options.credential.index, voter.package()};
    if (result.auth != AuthOutcome::accepted)
        return result;

    RelayMessage deliver = expect_relay(admin.recv_envelope(), MsgType::relay_av);
    try {
        RelayMessage ret = voter.respond(deliver);
        admin.send_envelope(relay_envelope(MsgType::relay_va, ret));
    } catch (const Error& e) {
        admin.send_envelope(announce_envelope(std::string("refused ") + e.what()));
    }

    Envelope exported = admin.recv_envelope();
    if (exported.type != MsgType::board_export)
        throw ProtocolError("expected the board export");
    result.export_text.assign(exported.body.begin(), exported.body.end());
    result.verify = voter.verify(parse_board_export(result.export_text));
    return result;
}

} // namespace enkvote
