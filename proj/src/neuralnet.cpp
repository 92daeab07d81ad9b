#include "botdetect/neuralnet.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "botdetect/error.hpp"
#include "botdetect/metrics.hpp"
#include "botdetect/text_io.hpp"

namespace botdetect {

template class nn::ContextualLstm<double>;

ContextualLstmModel init_lstm(const nn::LstmArchitecture& architecture, std::uint64_t seed) {
  ContextualLstmModel model(architecture);
  Rng rng(mix_seed(seed, 0x1A17));
  model.init(rng);
  return model;
}

nn::ForwardPass<double> forward(const ContextualLstmModel& model, const TweetExample& example) {
  return model.forward(example.sequence.matrix, example.sequence.true_length, example.metadata);
}

double predict(const ContextualLstmModel& model, const TweetExample& example) {
  return forward(model, example).main_score;
}

std::vector<double> predict(const ContextualLstmModel& model, std::span<const TweetExample> examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(predict(model, e));
  return out;
}

nn::LossParts<double> batch_gradient(const ContextualLstmModel& model, std::span<const TweetExample> batch,
                                     nn::ContextualLstmParams<double>& grad) {
  nn::LossParts<double> sum;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const auto fp = forward(model, ex);
    const double target = label_value(ex.label);
    const auto parts = model.loss(fp, target);
    sum.main += parts.main;
    sum.aux += parts.aux;
    sum.total += parts.total;
    model.backward(ex.sequence.matrix, fp, target, scale, grad);
  }
  sum.main *= scale;
  sum.aux *= scale;
  sum.total *= scale;
  return sum;
}

LstmTrainResult train_lstm(const nn::LstmArchitecture& architecture, const LstmTrainConfig& config,
                           std::span<const TweetExample> train, std::span<const TweetExample> validation) {
  if (train.empty()) throw Error(ErrorKind::DegenerateData, "empty training corpus");
  std::size_t bots = 0;
  for (const auto& e : train) bots += e.label == Label::Bot ? 1 : 0;
  if (bots == 0 || bots == train.size()) {
    throw Error(ErrorKind::DegenerateData, "training corpus needs both classes");
  }
  if (config.batch_size == 0 || config.epochs < 0) {
    throw Error(ErrorKind::InvalidConfig, "batch_size must be positive and epochs non-negative");
  }

  LstmTrainResult result{init_lstm(architecture, config.seed), {}};
  ContextualLstmModel& model = result.model;
  if (architecture.contextual()) {
    model.set_loss_weights(config.loss_weights);
    RowMatX meta(static_cast<Index>(train.size()), architecture.metadata_dim);
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train[i].metadata.size() != architecture.metadata_dim) {
        throw Error(ErrorKind::DimensionMismatch, "metadata width mismatch in training corpus");
      }
      meta.row(static_cast<Index>(i)) = train[i].metadata.transpose();
    }
    const auto standardizer = Standardizer::fit(meta);
    model.set_metadata_standardizer(standardizer.mean(), standardizer.scale());
  }

  TrainingTrace& trace = result.trace;
  trace.loss_weights = model.loss_weights();
  {
    std::ostringstream desc;
    desc << "adam(lr=" << format_real(config.adam.learning_rate) << ", beta1=" << format_real(config.adam.beta1)
         << ", beta2=" << format_real(config.adam.beta2) << ", eps=" << format_real(config.adam.epsilon)
         << "), batch=" << config.batch_size << ", epochs=" << config.epochs;
    trace.optimizer = desc.str();
  }

  nn::Adam<double> adam(config.adam);
  nn::ContextualLstmParams<double> grad(architecture);
  std::vector<TweetExample> batch;
  std::vector<std::size_t> order(train.size());
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(config.seed, 0xE0C0 + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<std::size_t>(order));

    EpochRecord epoch_record;
    epoch_record.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);

      grad.set_zero();
      const auto parts = batch_gradient(model, batch, grad);
      auto param_blocks = model.params().blocks();
      const auto grad_blocks = grad.blocks();
      adam.step(param_blocks, grad_blocks);

      trace.steps.push_back({epoch, step++, parts.main, parts.aux, parts.total});
      const double w = static_cast<double>(end - start) / static_cast<double>(order.size());
      epoch_record.main += w * parts.main;
      epoch_record.aux += w * parts.aux;
      epoch_record.total += w * parts.total;
    }
    if (!validation.empty()) {
      const auto scores = predict(model, validation);
      std::vector<Label> labels;
      for (const auto& e : validation) labels.push_back(e.label);
      const auto c = confusion_at(scores, labels);
      epoch_record.validation_accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
      const bool both = std::count(labels.begin(), labels.end(), Label::Bot) > 0 &&
                        std::count(labels.begin(), labels.end(), Label::Human) > 0;
      if (both) epoch_record.validation_auc = auc(scores, labels);
    }
    trace.epochs.push_back(epoch_record);
  }
  return result;
}

std::string TrainingTrace::to_csv() const {
  std::ostringstream out;
  out << "# optimizer: " << optimizer << "\n";
  out << "# loss weights: main " << format_real(loss_weights.main) << ", aux " << format_real(loss_weights.aux) << "\n";
  out << "kind,epoch,step,main_loss,aux_loss,total_loss,val_accuracy,val_auc\n";
  for (const auto& e : epochs) {
    out << "epoch," << e.epoch << ",," << format_real(e.main) << ',' << format_real(e.aux) << ','
        << format_real(e.total) << ',' << (e.validation_accuracy ? format_real(*e.validation_accuracy) : "")
        << ',' << (e.validation_auc ? format_real(*e.validation_auc) : "") << '\n';
  }
  for (const auto& s : steps) {
    out << "step," << s.epoch << ',' << s.step << ',' << format_real(s.main) << ',' << format_real(s.aux)
        << ',' << format_real(s.total) << ",,\n";
  }
  return out.str();
}

namespace {

MatX as_matrix(const VecX& v) { return MatX(v); }

}  // namespace

void write_lstm(const ContextualLstmModel& model, StructuredText& out) {
  const auto& a = model.architecture();
  out.set("model", a.contextual() ? "contextual_lstm" : "lstm_tweet_only");
  out.set("embedding_dim", std::to_string(a.embedding_dim));
  out.set("hidden_dim", std::to_string(a.hidden_dim));
  out.set("metadata_dim", std::to_string(a.contextual() ? a.metadata_dim : 0));
  out.set("dense1_dim", std::to_string(a.dense1_dim));
  out.set("dense2_dim", std::to_string(a.dense2_dim));
  out.set("loss_weight_main", format_real(model.loss_weights().main));
  out.set("loss_weight_aux", format_real(model.loss_weights().aux));
  out.set("lstm_gate_order", "input,forget,output,candidate");
  // Vectors are stored as single-column tensors.
  const auto& p = model.params();
  out.set_tensor("lstm.input_weights", p.cell.input_weights);
  out.set_tensor("lstm.recurrent_weights", p.cell.recurrent_weights);
  out.set_tensor("lstm.bias", as_matrix(p.cell.bias));
  if (a.contextual()) {
    out.set_tensor("aux_head.weight", p.aux_head.weight);
    out.set_tensor("aux_head.bias", as_matrix(p.aux_head.bias));
  }
  out.set_tensor("dense1.weight", p.dense1.weight);
  out.set_tensor("dense1.bias", as_matrix(p.dense1.bias));
  out.set_tensor("dense2.weight", p.dense2.weight);
  out.set_tensor("dense2.bias", as_matrix(p.dense2.bias));
  out.set_tensor("main_head.weight", p.main_head.weight);
  out.set_tensor("main_head.bias", as_matrix(p.main_head.bias));
  if (a.contextual()) {
    out.set_tensor("metadata.mean", as_matrix(model.metadata_mean()));
    out.set_tensor("metadata.scale", as_matrix(model.metadata_scale()));
  }
}

namespace {

Index parse_index(const StructuredText& in, std::string_view key) {
  try {
    return static_cast<Index>(std::stoll(in.require(key)));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::ParseError, "bad integer for '" + std::string(key) + "'");
  }
}

template <typename Target>
void load_into(Target& target, const MatX& source, std::string_view name) {
  if (target.rows() != source.rows() || target.cols() != source.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "tensor '" + std::string(name) + "' has shape " +
                                                  std::to_string(source.rows()) + "x" +
                                                  std::to_string(source.cols()));
  }
  target = source;
}

}  // namespace

ContextualLstmModel read_lstm(const StructuredText& in) {
  nn::LstmArchitecture a;
  const std::string& kind = in.require("model");
  if (kind == "contextual_lstm") a.variant = nn::LstmVariant::Contextual;
  else if (kind == "lstm_tweet_only") a.variant = nn::LstmVariant::TweetOnly;
  else throw Error(ErrorKind::ParseError, "not an LSTM model: '" + kind + "'");
  a.embedding_dim = parse_index(in, "embedding_dim");
  a.hidden_dim = parse_index(in, "hidden_dim");
  a.metadata_dim = a.contextual() ? parse_index(in, "metadata_dim") : 6;
  a.dense1_dim = parse_index(in, "dense1_dim");
  a.dense2_dim = parse_index(in, "dense2_dim");

  ContextualLstmModel model(a);
  model.set_loss_weights({std::stod(in.require("loss_weight_main")), std::stod(in.require("loss_weight_aux"))});
  auto& p = model.params();
  load_into(p.cell.input_weights, in.require_tensor("lstm.input_weights"), "lstm.input_weights");
  load_into(p.cell.recurrent_weights, in.require_tensor("lstm.recurrent_weights"), "lstm.recurrent_weights");
  load_into(p.cell.bias, in.require_tensor("lstm.bias"), "lstm.bias");
  if (a.contextual()) {
    load_into(p.aux_head.weight, in.require_tensor("aux_head.weight"), "aux_head.weight");
    load_into(p.aux_head.bias, in.require_tensor("aux_head.bias"), "aux_head.bias");
  }
  load_into(p.dense1.weight, in.require_tensor("dense1.weight"), "dense1.weight");
  load_into(p.dense1.bias, in.require_tensor("dense1.bias"), "dense1.bias");
  load_into(p.dense2.weight, in.require_tensor("dense2.weight"), "dense2.weight");
  load_into(p.dense2.bias, in.require_tensor("dense2.bias"), "dense2.bias");
  load_into(p.main_head.weight, in.require_tensor("main_head.weight"), "main_head.weight");
  load_into(p.main_head.bias, in.require_tensor("main_head.bias"), "main_head.bias");
  if (a.contextual()) {
    VecX mean(a.metadata_dim), scale(a.metadata_dim);
    load_into(mean, in.require_tensor("metadata.mean"), "metadata.mean");
    load_into(scale, in.require_tensor("metadata.scale"), "metadata.scale");
    model.set_metadata_standardizer(std::move(mean), std::move(scale));
  }
  return model;
}

}  // namespace botdetect
