def scan(object_name):
  for i in range(8):
    if vision_skill.is_visible(object_name) == True:
      return True
    drone_skill.turn_ccw(45)
  return False
