#include <fstream>

#include <nlohmann/json.hpp>

#include "focalize/classifiers.hpp"
#include "focalize/errors.hpp"
#include "focalize/util.hpp"

namespace focalize::baseline {

using annotation::label_from_name;
using annotation::label_name;
using nlohmann::json;

std::pair<Label, std::map<Label, double>> TrainedBaseline::predict(std::string_view text) const {
    FeatureVector vec = vectorize(text, features);
    if (kind == "naive_bayes") return nb_predict(nb, vec);
    if (kind == "logistic_regression") return logreg_predict(logreg, vec);
    throw DataError("unknown baseline kind: " + kind);
}

namespace {

json classes_to_json(const std::vector<Label>& classes) {
    json arr = json::array();
    for (Label l : classes) arr.push_back(label_name(l));
    return arr;
}

std::vector<Label> classes_from_json(const json& arr) {
    std::vector<Label> classes;
    for (const auto& v : arr) {
        auto l = label_from_name(v.get<std::string>());
        if (!l) throw DataError("bad class name in model file");
        classes.push_back(*l);
    }
    return classes;
}

}  // namespace

void save_baseline(const std::filesystem::path& path, const TrainedBaseline& model) {
    json j;
    j["kind"] = model.kind;
    j["weighting"] = weighting_name(model.features.weighting);
    j["ngram_min"] = model.features.ngram_min;
    j["ngram_max"] = model.features.ngram_max;
    j["vocabulary"] = model.features.vocabulary;
    j["idf"] = model.features.idf;
    if (model.kind == "naive_bayes") {
        j["classes"] = classes_to_json(model.nb.classes);
        j["log_prior"] = model.nb.log_prior;
        j["log_likelihood"] = model.nb.log_likelihood;
        j["alpha_smooth"] = model.nb.alpha_smooth;
    } else if (model.kind == "logistic_regression") {
        j["classes"] = classes_to_json(model.logreg.classes);
        j["weights"] = model.logreg.weights;
        j["bias"] = model.logreg.bias;
        j["lambda"] = model.logreg.lambda;
        j["converged"] = model.logreg.converged;
        j["iterations"] = model.logreg.iterations;
    } else {
        throw DataError("unknown baseline kind: " + model.kind);
    }
    util::write_file_atomic(path, j.dump(2) + "\n");
}

TrainedBaseline load_baseline(const std::filesystem::path& path) {
    json j = json::parse(util::read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError("model file is not valid JSON: " + path.string(), 0);
    TrainedBaseline model;
    try {
        model.kind = j.at("kind").get<std::string>();
        model.features.weighting = weighting_from_name(j.at("weighting").get<std::string>());
        model.features.ngram_min = j.at("ngram_min").get<int>();
        model.features.ngram_max = j.at("ngram_max").get<int>();
        model.features.vocabulary =
            j.at("vocabulary").get<std::unordered_map<std::string, int>>();
        model.features.idf = j.at("idf").get<std::vector<double>>();
        if (model.kind == "naive_bayes") {
            model.nb.classes = classes_from_json(j.at("classes"));
            model.nb.log_prior = j.at("log_prior").get<std::vector<double>>();
            model.nb.log_likelihood =
                j.at("log_likelihood").get<std::vector<std::vector<double>>>();
            model.nb.alpha_smooth = j.at("alpha_smooth").get<double>();
        } else if (model.kind == "logistic_regression") {
            model.logreg.classes = classes_from_json(j.at("classes"));
            model.logreg.weights = j.at("weights").get<std::vector<std::vector<double>>>();
            model.logreg.bias = j.at("bias").get<std::vector<double>>();
            model.logreg.lambda = j.at("lambda").get<double>();
            model.logreg.converged = j.at("converged").get<bool>();
            model.logreg.iterations = j.at("iterations").get<int>();
        } else {
            throw DataError("unknown baseline kind: " + model.kind);
        }
    } catch (const json::exception& ex) {
        throw SchemaError(std::string("bad model file: ") + ex.what(), 0);
    }
    return model;
}

}  // namespace focalize::baseline
