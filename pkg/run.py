from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Import after environment variables are loaded
from experiential.app import create_app

if __name__ == '__main__':
    app = create_app()
    app()
