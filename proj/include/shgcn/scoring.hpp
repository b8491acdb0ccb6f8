#pragma once

namespace shgcn {

// Read-only scoring surface. Evaluation only ever sees this interface, so
// any model that can score (user, item) pairs plugs into the same
// protocol.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(int user, int item) const = 0;
};

}  // namespace shgcn
