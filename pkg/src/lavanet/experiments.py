"""Ready-made parameter sets for common experiments."""

# Sequence learning: three input clusters stimulated in a row in each of
# ten trials, plastic excitatory connections, weights probed every trial.
SEQUENCE = {
    "seed": 1,
    "trials": 10,
    "stepsPerTrial": 60,
    "refractoryDelay": 2,
    "voltageTau": 100,
    "currentTau": 5,
    "thresholdMant": 1200,
    "reservoirExSize": 400,
    "reservoirConnPerNeuron": 35,
    "isLearningRule": True,
    "learningRule": "2^-2*x1*y0 - 2^-2*y1*x0 + 2^-4*x1*y1*y0 - 2^-3*y0*w*w",
    "inputIsSequence": True,
    "inputSequenceSize": 3,
    "inputSteps": 20,
    "inputGenSpikeProb": 0.8,
    "inputNumTargetNeurons": 40,
    "isExSpikeProbe": True,
    "isInSpikeProbe": True,
    "isWeightProbe": True,
}
