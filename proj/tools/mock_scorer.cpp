// Test endpoint for the black-box protocol.
//   mock_scorer constant <p>
//   mock_scorer logreg <data.csv> <lambda> <t> [iterations]
//   mock_scorer short | out-of-range | garbage | hang
#include "fairsel/dataio.hpp"
#include "fairsel/train.hpp"

#include <json.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: mock_scorer MODE [args]\n";
        return 2;
    }
    const std::string mode = argv[1];
    std::unique_ptr<fairsel::Scorer> inner;
    if (mode == "constant") {
        inner = std::make_unique<fairsel::ConstantScorer>(argc > 2 ? std::stod(argv[2]) : 0.5);
    } else if (mode == "logreg") {
        if (argc < 5) {
            std::cerr << "logreg needs <data.csv> <lambda> <t>\n";
            return 2;
        }
        fairsel::HyperParams h;
        h.lambda = std::stod(argv[3]);
        h.t = std::stod(argv[4]);
        fairsel::TrainConfig cfg;
        if (argc > 5) cfg.iterations = std::stoi(argv[5]);
        inner = std::make_unique<fairsel::LogregScorer>(fairsel::read_dataset_csv(argv[2]), h, cfg);
    }

    std::string line;
    while (std::getline(std::cin, line)) {
        auto req = nlohmann::json::parse(line, nullptr, false);
        if (req.is_discarded()) return 3;
        if (req.value("cmd", "") == "quit") return 0;
        auto n = req.value("all_n", std::size_t{0});
        auto selected = req.value("selected", std::vector<std::size_t>{});
        nlohmann::json reply;
        if (inner) {
            reply["scores"] = inner->train_score(selected, n);
        } else if (mode == "short") {
            reply["scores"] = std::vector<double>(n > 0 ? n - 1 : 0, 0.5);
        } else if (mode == "out-of-range") {
            std::vector<double> s(n, 0.5);
            if (n > 0) s[0] = 1.5;
            reply["scores"] = s;
        } else if (mode == "garbage") {
            std::cout << "this is not json" << std::endl;
            continue;
        } else if (mode == "hang") {
            std::this_thread::sleep_for(std::chrono::hours(1));
        } else {
            std::cerr << "unknown mode " << mode << '\n';
            return 2;
        }
        std::cout << reply.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << std::endl;
    }
    return 0;
}
