"""Online learning of finite concept classes with restricted hypotheses."""
