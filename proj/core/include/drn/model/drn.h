#ifndef DRN_MODEL_DRN_H_
#define DRN_MODEL_DRN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "drn/ad/ops.h"
#include "drn/ad/tensor.h"
#include "drn/dsp/waveform.h"
#include "drn/model/config.h"
#include "drn/model/doa.h"

namespace drn::model {

// Streaming state: input history for framing, per-layer LSTM state and the
// overlap-add carry.
template <typename T>
struct DrnState {
  int channels = 0;
  std::vector<T> history;  // [C x (iW - R)], oldest sample first
  std::vector<ad::LstmState<T>> lstm;
  std::vector<T> carry;  // [oW - R] pending partial sums
  int64_t frames = 0;

  static DrnState Zeros(const DrnConfig& config);
  void Reset();
  // Throws std::invalid_argument if the state was built for another shape.
  void CheckCompatible(const DrnConfig& config) const;

  // Bit-exact binary round trip.
  std::string Serialize() const;
  static DrnState Deserialize(const std::string& bytes);

  bool operator==(const DrnState& other) const;
};

// Directional recurrent network: framing (optionally DFT), per-channel input
// projection fused with channel-wise DOA embeddings, a spatial mixing block,
// an LSTM stack fused with frame-wise DOA embeddings, output projection and
// overlap-add. All paths are frame-causal.
template <typename T>
class DrnModel {
 public:
  explicit DrnModel(DrnConfig config);

  const DrnConfig& config() const { return config_; }
  ad::ParameterSet<T>& params() { return params_; }
  const ad::ParameterSet<T>& params() const { return params_; }

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); LSTM forget
  // bias = 1; layer-norm gain 1, offset 0; PReLU slope 0.25.
  void Initialize(uint64_t seed);

  // Channel-wise DOA embeddings, one [T x E_C] tensor per channel.
  std::vector<ad::Tensor<T>> ChannelwiseEmbedding(ad::Graph<T>& graph,
                                                  const DoaStream& doa) const;
  // Frame-wise DOA embedding [T x E_f].
  ad::Tensor<T> FramewiseEmbedding(ad::Graph<T>& graph,
                                   const DoaStream& doa) const;

  // Builds the graph for frames [first_frame, first_frame + num_frames) of
  // `mixture` (samples past the end read as zero) and returns the
  // num_frames * R samples finalized by these frames. Sample j of the result
  // sits at time first_frame * R + j - (oW - R). Advances `state`.
  ad::Tensor<T> BuildFrames(ad::Graph<T>& graph, const dsp::Waveform& mixture,
                            int first_frame, int num_frames,
                            const DoaStream& doa, DrnState<T>& state) const;

  // Whole-utterance inference. Output has T * R samples aligned with the
  // input (sample n estimates the target at time n).
  dsp::Waveform ForwardUtterance(const dsp::Waveform& mixture,
                                 const DoaStream& doa) const;

  // Processes a chunk whose length is a multiple of R and returns the
  // finalized samples, lagging ForwardUtterance by oW - R samples.
  dsp::Waveform ForwardStreaming(const dsp::Waveform& chunk,
                                 const DoaStream& doa,
                                 DrnState<T>& state) const;
  // The oW - R samples still pending in the overlap-add carry.
  dsp::Waveform Flush(const DrnState<T>& state) const;

 private:
  ad::Tensor<T> P(ad::Graph<T>& graph, const std::string& name) const;
  ad::Tensor<T> Dense(ad::Graph<T>& graph, const ad::Tensor<T>& x,
                      const std::string& prefix) const;
  ad::Tensor<T> Norm(ad::Graph<T>& graph, const ad::Tensor<T>& x,
                     const std::string& prefix) const;
  ad::Tensor<T> DenseNormPRelu(ad::Graph<T>& graph, const ad::Tensor<T>& x,
                               const std::string& prefix) const;
  ad::Tensor<T> EmbedOneHot(ad::Graph<T>& graph, const std::vector<int>& idx,
                            int depth, const std::string& prefix) const;
  void AddDense(const std::string& prefix, int out, int in, bool bias = true);
  void AddNorm(const std::string& prefix, int dim);
  void AddPRelu(const std::string& prefix, int dim);

  DrnConfig config_;
  ad::ParameterSet<T> params_;
  std::vector<T> input_dft_;    // [2F_in x iW]
  std::vector<T> output_idft_;  // [oW x 2F_out]
  std::vector<double> synthesis_;
};

// Row-major real-DFT matrix mapping a length-n frame to
// [Re X_0..Re X_{n/2}, Im X_0..Im X_{n/2}].
std::vector<double> RealDftMatrix(int n);
// Inverse of the above layout, [n x 2(n/2+1)]; imaginary parts of the DC and
// Nyquist bins are ignored.
std::vector<double> InverseRealDftMatrix(int n);

extern template class DrnModel<float>;
extern template class DrnModel<double>;
extern template struct DrnState<float>;
extern template struct DrnState<double>;

}  // namespace drn::model

#endif  // DRN_MODEL_DRN_H_
