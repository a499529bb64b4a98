#include <sstream>

#include "json.hpp"
#include "tlsgate/handshake.hpp"

namespace tlsgate {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join_versions(const std::vector<TlsVersion>& vs) {
  std::string out;
  for (TlsVersion v : vs) {
    if (!out.empty()) out += ",";
    out += to_string(v);
  }
  return out;
}

std::string join_suites(const std::vector<SuiteId>& ids) {
  std::string out;
  for (SuiteId id : ids) {
    if (!out.empty()) out += ",";
    out += format_suite_id(id);
  }
  return out;
}

nlohmann::ordered_json hello_json(const ClientHello& ch) {
  nlohmann::ordered_json j;
  j["legacy_max_version"] = to_string(ch.legacy_max_version);
  j["suites"] = nlohmann::ordered_json::array();
  for (SuiteId id : ch.suites) j["suites"].push_back(format_suite_id(id));
  if (ch.supported_versions) {
    j["supported_versions"] = nlohmann::ordered_json::array();
    for (TlsVersion v : *ch.supported_versions) j["supported_versions"].push_back(to_string(v));
  }
  return j;
}

}  // namespace

std::string transcript_to_text(const SessionTranscript& transcript) {
  std::ostringstream out;
  for (const auto& e : transcript.events) {
    std::visit(
        Overloaded{
            [&out](const event::HelloSent& ev) {
              out << "HelloSent legacy_max=" << to_string(ev.hello.legacy_max_version);
              if (ev.hello.supported_versions) {
                out << " supported_versions=[" << join_versions(*ev.hello.supported_versions) << "]";
              }
              out << " suites=[" << join_suites(ev.hello.suites) << "]";
            },
            [&out](const event::AttackerTransformed& ev) {
              out << "AttackerTransformed " << ev.description;
            },
            [&out](const event::HelloReceived& ev) {
              out << "HelloReceived version=" << to_string(ev.hello.selected_version)
                  << " suite=" << format_suite_id(ev.hello.selected_suite);
            },
            [&out](const event::FailureAlert& ev) { out << "FailureAlert " << ev.reason; },
            [&out](const event::ClientAborted& ev) { out << "ClientAborted " << ev.reason; },
            [&out](const event::RetryStarted& ev) {
              out << "RetryStarted max=" << to_string(ev.new_max_version);
            },
            [&out](const event::Established& ev) {
              out << "Established version=" << to_string(ev.version)
                  << " suite=" << format_suite_id(ev.suite);
            },
        },
        e);
    out << '\n';
  }
  return out.str();
}

std::string transcript_to_json(const SessionTranscript& transcript) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& e : transcript.events) {
    nlohmann::ordered_json r;
    std::visit(
        Overloaded{
            [&r](const event::HelloSent& ev) {
              r["event"] = "HelloSent";
              r["hello"] = hello_json(ev.hello);
            },
            [&r](const event::AttackerTransformed& ev) {
              r["event"] = "AttackerTransformed";
              r["description"] = ev.description;
            },
            [&r](const event::HelloReceived& ev) {
              r["event"] = "HelloReceived";
              r["version"] = to_string(ev.hello.selected_version);
              r["suite"] = format_suite_id(ev.hello.selected_suite);
            },
            [&r](const event::FailureAlert& ev) {
              r["event"] = "FailureAlert";
              r["reason"] = ev.reason;
            },
            [&r](const event::ClientAborted& ev) {
              r["event"] = "ClientAborted";
              r["reason"] = ev.reason;
            },
            [&r](const event::RetryStarted& ev) {
              r["event"] = "RetryStarted";
              r["new_max_version"] = to_string(ev.new_max_version);
            },
            [&r](const event::Established& ev) {
              r["event"] = "Established";
              r["version"] = to_string(ev.version);
              r["suite"] = format_suite_id(ev.suite);
            },
        },
        e);
    records.push_back(std::move(r));
  }
  return records.dump(2) + "\n";
}

}  // namespace tlsgate
