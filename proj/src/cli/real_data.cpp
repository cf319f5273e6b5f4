#include "weibcv/cli.hpp"

namespace weibcv::cli {

CensoredSample real_dataset() {
  return CensoredSample({5.5, 10.5, 15.5, 20.5, 25.5, 30.5, 40.5, 50.5, 60.5},
                        {18, 16, 18, 10, 11, 8, 13, 4, 1}, {1, 1, 3, 0, 0, 1, 2, 3, 2}, 112);
}

}  // namespace weibcv::cli
