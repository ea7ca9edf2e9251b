#pragma once

#include <string>

#include "oscrowd/adapt.hpp"
#include "oscrowd/crowd.hpp"
#include "oscrowd/net.hpp"
#include "oscrowd/open_set.hpp"
#include "oscrowd/pipeline.hpp"
#include "oscrowd/scenario.hpp"

// Serialisation boundary. All functions speak JSON/CSV text; file helpers
// write with LF endings. Field order is fixed so equal inputs produce
// byte-identical documents.
namespace oscrowd::io {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string scenario_to_json(const synth::Scenario& scenario);
synth::Scenario scenario_from_json(const std::string& text);

std::string net_to_json(const nn::MLPNet& net);
nn::MLPNet net_from_json(const std::string& text);

// The adaptation artifact embeds the scenario so the assignment stage can
// rebuild features and centers from one file.
struct PdaBundle {
    synth::Scenario scenario;
    pda::PdaResult result;
};

std::string pda_to_json(const synth::Scenario& scenario, const pda::PdaResult& result);
PdaBundle pda_from_json(const std::string& text);

// task_id,label,weighted_distance with "unknown" rows carrying an empty
// distance column.
std::string machine_labels_csv(const openset::LabelSplit& split);

std::string task_set_to_json(const pipeline::TaskSet& set);
pipeline::TaskSet task_set_from_json(const std::string& text);

std::string sim_report_to_json(const crowd::SimReport& report,
                               const std::vector<int>& label_space);

std::string run_report_to_json(const pipeline::RunReport& report);

std::string ablation_table_csv(const std::vector<pipeline::AblationRow>& rows);
std::string ablation_table_json(const std::vector<pipeline::AblationRow>& rows);

std::string compare_to_json(const pipeline::CompareResult& result);

}  // namespace oscrowd::io
