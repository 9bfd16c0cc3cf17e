def describe(config):
    print("run configuration:")
    for key, value in sorted(config.items()):
        print(f"  {key} = {value}")


if __name__ == "__main__":
    describe({"epochs": 10, "lr": 1e-3})
