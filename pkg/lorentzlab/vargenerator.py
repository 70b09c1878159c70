class Generator:
    def __init__(self):
        self.count = 0

    def gen_coupling_var(self, i, j):
        return "pi_%d_%d" % (i, j)

    def gen_objective_var(self):
        self.count += 1
        return "objective_" + str(self.count)
