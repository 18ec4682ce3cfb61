// SPDX-License-Identifier: Apache-2.0
//
// freesense: blind estimation of multi-cell OFDM transmit powers from the
// eigenvalue moments of the received sample covariance matrix.
// Copyright (C) 2026 the freesense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "freesense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace freesense {

std::string to_string(Alphabet a) {
    return a == Alphabet::gaussian ? "gaussian" : "qpsk";
}

Alphabet alphabet_from_string(const std::string& s) {
    if (s == "gaussian") return Alphabet::gaussian;
    if (s == "qpsk") return Alphabet::qpsk;
    throw std::invalid_argument("unknown alphabet '" + s + "' (expected gaussian or qpsk)");
}

int ChannelModel::delay_spread(int subcarriers) const {
    int tau = 0;
    switch (kind) {
        case Kind::iid_frequency: tau = subcarriers; break;
        case Kind::taps: tau = tap_count; break;
        case Kind::preset_eva:
            tau = std::max(1, static_cast<int>(std::lround(subcarriers / 27.0)));
            break;
        case Kind::preset_etu:
            tau = std::max(1, static_cast<int>(std::lround(subcarriers / 13.0)));
            break;
    }
    if (tau < 1 || tau > subcarriers) {
        std::ostringstream os;
        os << "delay spread " << tau << " outside [1, " << subcarriers << "]";
        throw std::invalid_argument(os.str());
    }
    return tau;
}

std::string ChannelModel::to_string() const {
    switch (kind) {
        case Kind::iid_frequency: return "iid-frequency";
        case Kind::taps: return "taps(" + std::to_string(tap_count) + ")";
        case Kind::preset_eva: return "preset(EVA)";
        case Kind::preset_etu: return "preset(ETU)";
    }
    return {};
}

ChannelModel ChannelModel::parse(const std::string& text) {
    if (text == "iid-frequency") return iid_frequency();
    if (text == "preset(EVA)") return preset_eva();
    if (text == "preset(ETU)") return preset_etu();
    if (text.rfind("taps(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(5, text.size() - 6);
        try {
            std::size_t pos = 0;
            const int tau = std::stoi(inner, &pos);
            if (pos == inner.size()) return taps(tau);
        } catch (const std::exception&) {
        }
    }
    throw std::invalid_argument("unknown channel_model '" + text +
                                "' (expected iid-frequency, taps(T), preset(EVA) or preset(ETU))");
}

void NetworkScenario::validate() const {
    if (stations < 1) throw std::invalid_argument("station count M must be >= 1");
    if (subcarriers < 1) throw std::invalid_argument("subcarrier count N must be >= 1");
    if (symbols < 1) throw std::invalid_argument("symbol count L must be >= 1");
    if (static_cast<int>(powers.size()) != stations)
        throw std::invalid_argument("powers must have exactly M entries");
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (!(powers[i] >= 0.0)) throw std::invalid_argument("powers must be nonnegative");
        if (i > 0 && powers[i] > powers[i - 1])
            throw std::invalid_argument("powers must be sorted descending");
    }
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be nonnegative");
    channel_model.delay_spread(subcarriers);  // range check
}

NetworkScenario NetworkScenario::with_powers(std::vector<double> new_powers) const {
    NetworkScenario out = *this;
    std::sort(new_powers.begin(), new_powers.end(), std::greater<double>());
    out.powers = std::move(new_powers);
    out.stations = static_cast<int>(out.powers.size());
    return out;
}

NetworkScenario NetworkScenario::from_document(kv::Document& doc,
                                               std::optional<int> symbols_override) {
    NetworkScenario s;
    s.stations = static_cast<int>(doc.get_int("M"));
    s.subcarriers = static_cast<int>(doc.get_int("N"));
    s.symbols = symbols_override ? *symbols_override : static_cast<int>(doc.get_int("L"));
    s.powers = doc.get_double_list("powers");
    s.sigma2 = doc.get_double("sigma2");
    if (auto cm = doc.opt_string("channel_model")) {
        try {
            s.channel_model = ChannelModel::parse(*cm);
        } catch (const std::invalid_argument& e) {
            doc.fail_at("channel_model", e.what());
        }
    }
    if (auto al = doc.opt_string("alphabet")) {
        try {
            s.alphabet = alphabet_from_string(*al);
        } catch (const std::invalid_argument& e) {
            doc.fail_at("alphabet", e.what());
        }
    }
    s.master_seed = doc.opt_uint64("master_seed").value_or(1);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        doc.fail_at("M", e.what());
    }
    return s;
}

NetworkScenario NetworkScenario::from_file(const std::string& path) {
    kv::Document doc = kv::Document::parse_file(path);
    NetworkScenario s = from_document(doc);
    doc.require_all_used();
    return s;
}

std::string NetworkScenario::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "M = " << stations << "\n";
    os << "N = " << subcarriers << "\n";
    os << "L = " << symbols << "\n";
    os << "powers = ";
    for (std::size_t i = 0; i < powers.size(); ++i) os << (i ? "," : "") << powers[i];
    os << "\n";
    os << "sigma2 = " << sigma2 << "\n";
    os << "channel_model = " << channel_model.to_string() << "\n";
    os << "alphabet = " << freesense::to_string(alphabet) << "\n";
    os << "master_seed = " << master_seed << "\n";
    return os.str();
}

}  // namespace freesense
